#pragma once

#include "sentsim/material.hpp"

namespace sentsim::pf {

/// Hydrogen-degraded toughness Gc(C) = Gc_min + (Gc0 - Gc_min) exp(-q C).
/// C in wt ppm. Strictly decreasing, asymptote Gc_min; exact Gc0 at C=0.
double gc_of_c(double c_wtppm, const MaterialParams& m);

/// AT2 homogeneous critical stress sigma_c = sqrt(27 E Gc / (256 ell)).
double critical_stress(double E, double Gc, double ell);

struct History {
  double He;  // updated running max of psi_e^+
  double H;   // combined driving force He + beta*psi_p
};

/// History update: the max applies to the elastic part only, the (monotone)
/// plastic contribution is added afterwards.
History update_history(double psi_e_plus, double psi_p, double He_prev, double beta);

/// Pointwise homogeneous solution of Gc(phi/ell) = 2(1-phi)H.
inline double homogeneous_phi(double H, double Gc, double ell) {
  return 2.0 * H / (Gc / ell + 2.0 * H);
}

}  // namespace sentsim::pf
