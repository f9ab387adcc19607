#pragma once

#include <string>
#include <vector>

#include "sentsim/common.hpp"
#include "sentsim/diffusion.hpp"

namespace sentsim::perm {

/// Normalised membrane flux 1 + 2 sum (-1)^n exp(-n^2 pi^2 tau); value in
/// [0,1], evaluated through the dual theta series near tau = 0.
double normalized_flux(double tau);

/// Anodic current transient of a Devanathan-Stachurski membrane.
struct PermeationTransient {
  std::vector<double> t_s;    // strictly increasing
  std::vector<double> j_Am2;  // anodic current density
  double thickness_m = 0.0;
  double area_m2 = 0.0;
  std::string label;

  void validate() const;
  /// Two-column (seconds, A/m^2) text with '# key = value' header lines
  /// (thickness_m, area_m2, label).
  static PermeationTransient from_file(const std::string& path);
  void to_file(const std::string& path) const;
};

struct PermeationFit {
  double D_m2s = 0.0;
  double j_inf = 0.0;
  double j0 = 0.0;
  double r2 = 0.0;

  void validate() const;
};

struct FitOptions {
  double window_hours = 0.0;  // 0 = auto (rise detection)
  int max_iter = 200;
};

/// Nonlinear least squares of (j - j0)/(j_inf - j0) against the normalised
/// flux at tau = D t / l^2, over (D, j_inf, j0).
PermeationFit fit_transient(const PermeationTransient& data, const FitOptions& opt = {});

/// Sub-surface concentration C0 = j_inf l / (F D).
double subsurface_concentration_molm3(double j_inf, double l_m, double D_m2s);
double subsurface_concentration_wtppm(double j_inf, double l_m, double D_m2s);

struct Anchor {
  double fraction_pct = 0.0;
  double value = 0.0;
};

/// Linear interpolation of the anchor values against log10(H2S fraction).
/// Extrapolation outside the anchor hull requires the explicit opt-in.
double interpolate_h2s(double fraction_pct, std::vector<Anchor> anchors,
                       bool allow_extrapolation = false);

/// Converts a full transient into a surface-concentration schedule via the
/// sub-surface relation applied pointwise, downsampled to at most max_knots.
diff::EnvSchedule build_env_schedule(const PermeationTransient& data, const PermeationFit& fit,
                                     std::size_t max_knots = 50);

/// Pointwise log-fraction interpolation between two schedules.
diff::EnvSchedule interpolate_schedules(double fraction_pct, double f_lo,
                                        const diff::EnvSchedule& lo, double f_hi,
                                        const diff::EnvSchedule& hi,
                                        std::size_t max_knots = 50);

}  // namespace sentsim::perm
