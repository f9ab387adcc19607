#include "sentsim/mechanics.hpp"

#include <cmath>

namespace sentsim::mech {

double flow_stress(double eps_p, const MaterialParams& m) {
  if (eps_p < 0) throw RangeError("flow_stress: negative equivalent plastic strain");
  return m.sigma_y * std::pow(1.0 + m.E * eps_p / m.sigma_y, m.N);
}

double flow_stress_slope(double eps_p, const MaterialParams& m) {
  if (eps_p < 0) throw RangeError("flow_stress_slope: negative equivalent plastic strain");
  return m.E * m.N * std::pow(1.0 + m.E * eps_p / m.sigma_y, m.N - 1.0);
}

double plastic_energy(double eps_p, const MaterialParams& m) {
  if (eps_p < 0) throw RangeError("plastic_energy: negative equivalent plastic strain");
  if (!std::isfinite(eps_p)) throw RangeError("plastic_energy: non-finite input");
  const double c = m.sigma_y * m.sigma_y / (m.E * (m.N + 1.0));
  double psi = c * std::pow(1.0 + m.E * eps_p / m.sigma_y, m.N + 1.0);
  if (m.subtract_psi_p_offset) psi -= c;
  return psi;
}

Degradation degradation(double phi, double beta) {
  if (phi < -1e-9 || phi > 1.0 + 1e-9) {
    if (phi < -1e-6 || phi > 1.0 + 1e-6)
      throw StateError("degradation: phi = " + std::to_string(phi) + " far outside [0,1]");
    warnf("degradation: clamping phi = %.3e to [0,1]", phi);
  }
  phi = std::min(1.0, std::max(0.0, phi));
  const double g = (1.0 - phi) * (1.0 - phi);
  return {g, beta * g + (1.0 - beta)};
}

double elastic_energy(const Sym2& e, const MaterialParams& m) {
  const double tr = e.trace();
  return 0.5 * m.lambda() * tr * tr + m.mu() * e.ddot(e);
}

double elastic_energy_plus(const Sym2& e, const MaterialParams& m) {
  if (m.split == EnergySplit::none) return elastic_energy(e, m);
  // Spectral split: principal strains of the in-plane block plus the
  // decoupled zz component.
  const double mean = 0.5 * (e.xx + e.yy);
  const double r = std::sqrt(0.25 * (e.xx - e.yy) * (e.xx - e.yy) + e.xy * e.xy);
  const double p[3] = {mean + r, mean - r, e.zz};
  const double trp = std::max(0.0, p[0] + p[1] + p[2]);
  double sum_sq_plus = 0.0;
  for (double v : p) {
    const double vp = std::max(0.0, v);
    sum_sq_plus += vp * vp;
  }
  return 0.5 * m.lambda() * trp * trp + m.mu() * sum_sq_plus;
}

namespace {

// Applies a*I(tr) + b*dev + c*(n:eps)n to a strain-like tensor, the building
// block of both elastic and consistent elastoplastic tangents.
struct TangentOp {
  double vol;    // multiplies tr(eps)*I
  double dev2mu; // multiplies dev(eps)
  double nn;     // multiplies (n:eps) n
  Sym2 n;

  Sym2 apply(const Sym2& eps) const {
    Sym2 out = vol * eps.trace() * Sym2::identity() + dev2mu * eps.dev();
    if (nn != 0.0) out += nn * n.ddot(eps) * n;
    return out;
  }
};

// 3x3 tangent for (exx, eyy, gamma_xy) rows (sxx, syy, sxy), built by applying
// the closed-form operator to unit strain variations (eps_zz = 0 in-plane).
Eigen::Matrix3d reduce_tangent(const TangentOp& op) {
  Eigen::Matrix3d D;
  const Sym2 unit[3] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 0.5}};
  for (int j = 0; j < 3; ++j) {
    const Sym2 s = op.apply(unit[j]);
    D(0, j) = s.xx;
    D(1, j) = s.yy;
    D(2, j) = s.xy;
  }
  return D;
}

}  // namespace

PointResult return_map(const Sym2& strain, const QPState& prev, double phi,
                       const MaterialParams& m) {
  const auto [g_raw, gbar] = degradation(phi, m.beta);
  const double g = g_raw + m.k_res;
  const double mu_g = g * m.mu();
  const double K_g = g * m.bulk();

  // Elastic trial from the committed plastic strain.
  const Sym2 eps_e_tr = strain - prev.eps_p;
  const double tr_e = eps_e_tr.trace();
  const Sym2 s_tr = (2.0 * mu_g) * eps_e_tr.dev();
  const double s_tr_norm = s_tr.norm();

  const double sqrt23 = std::sqrt(2.0 / 3.0);
  const double f_tr = s_tr_norm - sqrt23 * gbar * flow_stress(prev.eps_p_eq, m);

  PointResult res;
  res.next = prev;

  if (f_tr <= 0.0) {
    res.sigma = K_g * tr_e * Sym2::identity() + s_tr;
    res.D = reduce_tangent({K_g, 2.0 * mu_g, 0.0, {}});
    const Sym2 eps_e = eps_e_tr;
    res.psi_e = elastic_energy(eps_e, m);
    res.psi_e_plus = elastic_energy_plus(eps_e, m);
    res.next.sigma = res.sigma;
    res.next.psi_p = plastic_energy(prev.eps_p_eq, m);
    res.next.psi_e_plus = res.psi_e_plus;
    return res;
  }

  // Local Newton on the plastic multiplier increment.
  double dgamma = f_tr / (2.0 * mu_g + (2.0 / 3.0) * gbar * flow_stress_slope(prev.eps_p_eq, m));
  const double tol = 1e-10 * m.sigma_y;
  int it = 0;
  for (; it < 50; ++it) {
    const double ep = prev.eps_p_eq + sqrt23 * dgamma;
    const double r = s_tr_norm - 2.0 * mu_g * dgamma - sqrt23 * gbar * flow_stress(ep, m);
    if (std::abs(r) <= tol) break;
    const double dr = -2.0 * mu_g - (2.0 / 3.0) * gbar * flow_stress_slope(ep, m);
    double step = -r / dr;
    if (dgamma + step < 0.0) step = -0.5 * dgamma;  // keep the multiplier admissible
    dgamma += step;
  }
  if (it >= 50) {
    throw SolverError("return_map: local Newton did not converge (phi=" + std::to_string(phi) +
                      ", eps_p_eq=" + std::to_string(prev.eps_p_eq) +
                      ", |s_tr|=" + std::to_string(s_tr_norm) + ")");
  }

  const Sym2 n = s_tr * (1.0 / s_tr_norm);
  const Sym2 s = s_tr - (2.0 * mu_g * dgamma) * n;

  res.next.eps_p = prev.eps_p + dgamma * n;
  res.next.eps_p_eq = prev.eps_p_eq + sqrt23 * dgamma;
  res.sigma = K_g * tr_e * Sym2::identity() + s;
  res.next.sigma = res.sigma;
  res.next.psi_p = plastic_energy(res.next.eps_p_eq, m);
  res.iters = it + 1;

  const Sym2 eps_e = strain - res.next.eps_p;
  res.psi_e = elastic_energy(eps_e, m);
  res.psi_e_plus = elastic_energy_plus(eps_e, m);
  res.next.psi_e_plus = res.psi_e_plus;

  // Consistent tangent (Simo-Hughes form with degraded moduli).
  const double Hbar = gbar * flow_stress_slope(res.next.eps_p_eq, m);
  const double b1 = 2.0 * mu_g * dgamma / s_tr_norm;
  const double b2 = 2.0 * mu_g / (2.0 * mu_g + (2.0 / 3.0) * Hbar);
  res.D = reduce_tangent({K_g, 2.0 * mu_g * (1.0 - b1), 2.0 * mu_g * (b1 - b2), n});
  return res;
}

}  // namespace sentsim::mech
