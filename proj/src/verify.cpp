#include "sentsim/verify.hpp"

#include <cmath>

#include "sentsim/assembly.hpp"
#include "sentsim/coupling.hpp"
#include "sentsim/phasefield.hpp"

namespace sentsim::verify {

BarResult homogeneous_bar(double E, double Gc, double ell, const BarOptions& opt) {
  MaterialParams m;
  m.E = E;
  m.nu = 0.0;
  m.sigma_y = 1e9;  // stays elastic
  m.Gc0 = Gc;
  m.Gc_min = Gc;    // no hydrogen in this problem
  m.ell = ell;
  m.subtract_psi_p_offset = true;
  m.validate();

  const double h = opt.elem_h > 0 ? opt.elem_h : ell / 5.0;
  const int nx = std::max(4, static_cast<int>(std::ceil(opt.length / h)));
  const double height = opt.height > 0 ? opt.height : opt.length / nx;
  const fem::Mesh mesh = fem::build_rect_mesh(opt.length, height, nx, 1);

  // u_x = 0 left, ramped right; u_y = 0 on the bottom (nu = 0, no lateral coupling)
  fem::DofMap dm(mesh.n_nodes(), 2);
  for (int n : mesh.left_edge) dm.set_dirichlet(n, 0, 0.0);
  for (int n : mesh.right_edge) dm.set_dirichlet(n, 0, 0.0);  // value updated per step
  for (int n : mesh.ligament) dm.set_dirichlet(n, 1, 0.0);
  dm.finalize();

  fem::DofMap dm_phi(mesh.n_nodes(), 1);
  dm_phi.finalize();

  fem::FieldProblem fp_mech(mesh, dm, fem::LinearSolver::Kind::spd);
  fem::FieldProblem fp_phi(mesh, dm_phi, fem::LinearSolver::Kind::spd);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(mesh.n_nodes());
  Eigen::VectorXd conc = Eigen::VectorXd::Zero(mesh.n_nodes());
  Eigen::VectorXd f_ext = Eigen::VectorXd::Zero(dm.n_eq());
  Eigen::VectorXd f_int = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
  std::vector<mech::QPState> committed(mesh.n_elems() * mesh.nqp), trial;
  std::vector<double> H_qp(committed.size(), 0.0);
  std::vector<double> He(committed.size(), 0.0);

  // Optional imperfection: amplify the history of the centre column so the
  // post-peak solution localizes there instead of staying homogeneous.
  std::vector<double> He_seed(committed.size(), 0.0);
  if (opt.imperfection > 0) {
    for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
      const double xc = mesh.qp_at(e, 0).x;
      if (std::abs(xc - opt.length / 2) < opt.length / nx)
        for (int q = 0; q < mesh.nqp; ++q) He_seed[e * mesh.nqp + q] = opt.imperfection;
    }
  }

  // homogeneous AT2 bar peaks at eps = sqrt(Gc/(3 ell E))
  const double eps_peak = std::sqrt(Gc / (3.0 * ell * E));
  const double eps_max = opt.strain_max > 0 ? opt.strain_max : 3.0 * eps_peak;

  fem::NewtonOptions nopt;
  nopt.tol_rel = 1e-10;
  nopt.tol_abs = 1e-9;

  BarResult res;
  res.cross_section = height;

  for (int step = 1; step <= opt.nsteps; ++step) {
    const double eps = eps_max * step / opt.nsteps;
    for (int n : mesh.right_edge) dm.update_value(n, 0, eps * opt.length);

    for (int pass = 0; pass < opt.stagger_max; ++pass) {
      fem::solve_mechanics(fp_mech, u, committed, phi, m, f_ext, trial, &f_int, nopt,
                           fem::AssemblyMode::serial);
      for (std::size_t i = 0; i < H_qp.size(); ++i) {
        He[i] = std::max(committed[i].He, trial[i].psi_e_plus * (1.0 + He_seed[i]));
        H_qp[i] = He[i];
      }
      fem::assemble_phase(fp_phi, H_qp, conc, m, fem::AssemblyMode::serial);
      fp_phi.solver().solve(fp_phi.sys());
      double dphi = 0.0;
      for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
        double v = fp_phi.sys().x[dm_phi.eq(static_cast<int>(n), 0)];
        v = std::min(1.0, std::max(0.0, v));
        dphi = std::max(dphi, std::abs(v - phi[n]));
        phi[n] = v;
      }
      if (dphi < opt.stagger_tol) break;
    }
    // commit
    for (std::size_t i = 0; i < committed.size(); ++i) {
      committed[i] = trial[i];
      committed[i].He = He[i];
    }

    double force = 0.0;
    for (int n : mesh.right_edge) force += f_int[2 * n];
    const double stress = force / height;
    if (stress > res.peak_stress) {
      res.peak_stress = stress;
      res.peak_strain = eps;
    }
    res.steps = step;
  }

  // Fracture energy: integral of Gc (phi^2/(2 ell) + ell/2 |grad phi|^2).
  double efrac = 0.0;
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    const auto& el = mesh.elems[e];
    for (int q = 0; q < mesh.nqp; ++q) {
      const fem::QPData& d = mesh.qp_at(e, q);
      double p = 0, gx = 0, gy = 0;
      for (int a = 0; a < 8; ++a) {
        p += d.N[a] * phi[el[a]];
        gx += d.dNdx[a] * phi[el[a]];
        gy += d.dNdy[a] * phi[el[a]];
      }
      efrac += d.wdetJ * Gc * (p * p / (2 * ell) + 0.5 * ell * (gx * gx + gy * gy));
    }
  }
  res.fracture_energy = efrac;
  return res;
}

std::vector<UniaxialPoint> uniaxial_stress_curve(const MaterialParams& m, double eps_max,
                                                 int nsteps, double phi) {
  std::vector<UniaxialPoint> curve;
  curve.reserve(nsteps + 1);
  mech::QPState committed;
  committed.psi_p = mech::plastic_energy(0.0, m);
  double lat = 0.0;  // eps_yy = eps_zz, iterated so sig_yy = sig_zz = 0

  curve.push_back({0.0, 0.0, 0.0});
  for (int s = 1; s <= nsteps; ++s) {
    const double exx = eps_max * s / nsteps;
    // scalar Newton on the lateral strain
    for (int it = 0; it < 60; ++it) {
      const Sym2 eps{exx, lat, lat, 0.0};
      const auto pr = mech::return_map(eps, committed, phi, m);
      if (std::abs(pr.sigma.yy) < 1e-8 * m.sigma_y) break;
      const double dl = 1e-8 + 1e-8 * std::abs(lat);
      const Sym2 eps2{exx, lat + dl, lat + dl, 0.0};
      const auto pr2 = mech::return_map(eps2, committed, phi, m);
      const double slope = (pr2.sigma.yy - pr.sigma.yy) / dl;
      lat -= pr.sigma.yy / slope;
    }
    const Sym2 eps{exx, lat, lat, 0.0};
    const auto pr = mech::return_map(eps, committed, phi, m);
    committed = pr.next;
    curve.push_back({exx, pr.sigma.xx, pr.next.eps_p_eq});
  }
  return curve;
}

}  // namespace sentsim::verify
