#pragma once

#include <string>
#include <vector>

#include "sentsim/material.hpp"

namespace sentsim::diff {

/// Damage-amplified diffusivity D0 (1 + k_d <phi - phi_th>).
double effective_diffusivity(double phi, const MaterialParams& m);

/// Zero-flux equilibrium enrichment exp(V_H sigma_h / (R T)).
double steady_amplification(double sigma_h, const MaterialParams& m);

/// Time-dependent surface hydrogen concentration (piecewise linear in time,
/// clamped beyond the last knot). Knots in hours / wt ppm.
struct EnvSchedule {
  std::vector<double> t_hours;
  std::vector<double> c_wtppm;

  void validate() const;
  /// Piecewise-linear evaluation; t in seconds, result in wt ppm.
  double eval_wtppm(double t_seconds) const;
  double peak() const;

  static EnvSchedule constant(double c_wtppm);
  /// Two-column text table (hours, wt ppm); '#' comments.
  static EnvSchedule from_file(const std::string& path);
  void to_file(const std::string& path) const;
};

}  // namespace sentsim::diff
