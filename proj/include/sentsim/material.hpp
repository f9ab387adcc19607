#pragma once

#include <string>

#include "sentsim/common.hpp"
#include "sentsim/units.hpp"

namespace sentsim {

enum class EnergySplit { none, spectral };

/// Constitutive, fracture and transport constants.
/// Defaults are the C110 steel set used throughout the tests.
struct MaterialParams {
  // elasticity / plasticity
  double E = 207000.0;   // MPa
  double nu = 0.3;
  double sigma_y = 800.0;  // MPa
  double N = 0.04;         // hardening exponent, 0..1

  // fracture
  double Gc0 = 40.0;     // N/mm, hydrogen-free toughness
  double q = 0.5;        // 1/wt-ppm, degradation fit
  double Gc_min = 2.0;   // N/mm, saturation toughness
  double ell = 0.085;    // mm, phase-field length
  double beta = 0.1;     // stored fraction of plastic work

  // transport
  double D0 = 1.4e-4;    // mm^2/s
  double V_H = 2000.0;   // mm^3/mol
  double T = 297.0;      // K
  double k_d = 1000.0;   // diffusivity amplification in damaged material
  double phi_th = 0.8;   // damage threshold for amplification

  // numerical choices
  double k_res = 1e-8;             // residual stiffness multiplier on the elastic tensor
  bool subtract_psi_p_offset = false;  // subtract the eps_p=0 value of psi_p
  EnergySplit split = EnergySplit::none;

  double R() const { return units::gas_constant; }

  double mu() const { return E / (2.0 * (1.0 + nu)); }
  double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double bulk() const { return E / (3.0 * (1.0 - 2.0 * nu)); }
  double E_plane_strain() const { return E / (1.0 - nu * nu); }

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("material: " + msg); };
    if (!(E > 0)) fail("E must be > 0");
    if (!(nu >= 0 && nu < 0.5)) fail("nu must be in [0, 0.5)");
    if (!(sigma_y > 0)) fail("sigma_y must be > 0");
    if (!(N >= 0 && N <= 1)) fail("N must be in [0, 1]");
    if (!(Gc_min > 0 && Gc_min <= Gc0)) fail("require 0 < Gc_min <= Gc0");
    if (!(q >= 0)) fail("q must be >= 0");
    if (!(ell > 0)) fail("ell must be > 0");
    if (!(beta >= 0 && beta <= 1)) fail("beta must be in [0, 1]");
    if (!(D0 > 0)) fail("D0 must be > 0");
    if (!(T > 0)) fail("T must be > 0");
    if (!(k_d >= 0)) fail("k_d must be >= 0");
    if (!(phi_th >= 0 && phi_th < 1)) fail("phi_th must be in [0, 1)");
    if (!(k_res >= 0 && k_res < 1e-3)) fail("k_res must be in [0, 1e-3)");
  }
};

}  // namespace sentsim
