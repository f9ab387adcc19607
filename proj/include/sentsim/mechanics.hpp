#pragma once

#include <Eigen/Dense>

#include "sentsim/material.hpp"
#include "sentsim/tensor.hpp"

namespace sentsim::mech {

/// Power-law flow stress sigma_f = sigma_y (1 + E eps_p / sigma_y)^N.
double flow_stress(double eps_p, const MaterialParams& m);

/// d(sigma_f)/d(eps_p).
double flow_stress_slope(double eps_p, const MaterialParams& m);

/// Plastic strain energy density psi_p = sigma_y^2/(E(N+1)) (1+E eps_p/sigma_y)^(N+1).
/// Evaluated as printed; m.subtract_psi_p_offset removes the eps_p=0 constant.
double plastic_energy(double eps_p, const MaterialParams& m);

struct Degradation {
  double g;     // (1-phi)^2, applied to the elastic energy/stress
  double gbar;  // beta*g + (1-beta), applied to the flow stress
};

/// Quadratic degradation pair. phi outside [0,1] by <=1e-9 is clamped with a
/// warning; larger violations raise StateError.
Degradation degradation(double phi, double beta);

/// Per-quadrature-point plastic state. He is the running max of the (undamaged)
/// tensile elastic energy density; it lives here but is owned by the phase-field
/// history logic.
struct QPState {
  Sym2 eps_p;            // plastic strain tensor (trace-free)
  double eps_p_eq = 0.0; // equivalent plastic strain
  double He = 0.0;       // max_t psi_e^+  [N/mm^3]
  Sym2 sigma;            // last converged stress (for output / sigma_h)
  double psi_p = 0.0;    // current plastic energy density
  double psi_e_plus = 0.0;  // tensile elastic energy at the same state
};

struct PointResult {
  Sym2 sigma;                 // degraded stress
  Eigen::Matrix3d D;          // consistent tangent for (exx, eyy, gamma_xy)
  QPState next;               // updated plastic state (He untouched)
  double psi_e = 0.0;         // undamaged elastic energy density
  double psi_e_plus = 0.0;    // tensile part per configured split
  int iters = 0;              // local Newton iterations (0 = elastic)
};

/// Radial-return J2 update against the degraded yield surface gbar*sigma_f.
/// strain: total strain (zz component as given; the FE layer passes eps_zz=0).
/// phi: local damage value. prev: converged state of the last accepted step.
PointResult return_map(const Sym2& strain, const QPState& prev, double phi,
                       const MaterialParams& m);

/// tr(sigma)/3 including the out-of-plane component.
inline double hydrostatic_stress(const Sym2& s) { return s.trace() / 3.0; }

/// Undamaged elastic energy density 0.5*lambda*tr(e)^2 + mu*e:e and its
/// tensile part under the configured split.
double elastic_energy(const Sym2& eps_e, const MaterialParams& m);
double elastic_energy_plus(const Sym2& eps_e, const MaterialParams& m);

}  // namespace sentsim::mech
