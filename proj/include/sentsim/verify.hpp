#pragma once

#include <vector>

#include "sentsim/material.hpp"

namespace sentsim::verify {

/// Outcome of a displacement-controlled homogeneous AT2 bar run (elastic
/// response, nu = 0 so plane strain reduces to a 1D bar).
struct BarResult {
  double peak_stress = 0;      // MPa, max nominal stress over the ramp
  double peak_strain = 0;
  double fracture_energy = 0;  // integral of Gc * crack density at the end, N*mm per mm thickness
  double cross_section = 0;    // bar height (per unit thickness), mm
  int steps = 0;
};

struct BarOptions {
  double length = 1.0;           // mm
  double height = 0.0;           // 0 -> one square row at elem_h
  double elem_h = 0.0;           // 0 -> ell/5
  double strain_max = 0.0;       // 0 -> 3 * analytic critical strain
  int nsteps = 400;
  double stagger_tol = 1e-8;
  int stagger_max = 500;
  double imperfection = 0.0;     // relative He seed in the centre column (localization trigger)
};

/// Drives the actual FE machinery (mesh, mechanics assembly, phase solve) on a
/// strip mesh; used by the strength oracle and mesh-refinement checks.
BarResult homogeneous_bar(double E, double Gc, double ell, const BarOptions& opt = {});

struct UniaxialPoint {
  double eps_xx;
  double sig_xx;     // MPa
  double eps_p_eq;
};

/// Material-point uniaxial-stress response: lateral strains iterated so
/// sig_yy = sig_zz = 0. Exercises the radial-return map on a stress path where
/// the hardening law is recoverable in closed form.
std::vector<UniaxialPoint> uniaxial_stress_curve(const MaterialParams& m, double eps_max,
                                                 int nsteps, double phi = 0.0);

}  // namespace sentsim::verify
