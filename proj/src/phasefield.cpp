#include "sentsim/phasefield.hpp"

#include <cmath>

namespace sentsim::pf {

double gc_of_c(double c_wtppm, const MaterialParams& m) {
  if (c_wtppm < 0) {
    if (c_wtppm > -1e-6) {
      c_wtppm = 0.0;  // drift-induced undershoot tolerance
    } else {
      throw RangeError("gc_of_c: negative concentration " + std::to_string(c_wtppm));
    }
  }
  // Algebraically identical to [Gc_min/Gc0 + (1-Gc_min/Gc0) exp(-qC)] Gc0,
  // exact at C=0.
  return m.Gc_min + (m.Gc0 - m.Gc_min) * std::exp(-m.q * c_wtppm);
}

double critical_stress(double E, double Gc, double ell) {
  if (E < 0 || Gc < 0 || ell <= 0) throw RangeError("critical_stress: invalid inputs");
  return std::sqrt(27.0 * E * Gc / (256.0 * ell));
}

History update_history(double psi_e_plus, double psi_p, double He_prev, double beta) {
  if (!(std::isfinite(psi_e_plus) && std::isfinite(psi_p)) || psi_e_plus < 0 || psi_p < 0)
    throw StateError("update_history: non-finite or negative energy input");
  const double He = std::max(He_prev, psi_e_plus);
  return {He, He + beta * psi_p};
}

}  // namespace sentsim::pf
