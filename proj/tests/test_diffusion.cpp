#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sentsim/assembly.hpp"
#include "sentsim/units.hpp"

using namespace sentsim;
using sentsim::test::c110;
using sentsim::test::TempDir;

namespace {

// membrane problem: C(0)=Cs, C(l)=0, C(x,0)=0
double membrane_series(double x_over_l, double tau) {
  double s = 1.0 - x_over_l;
  for (int n = 1; n < 2000; ++n) {
    const double term = (2.0 / (n * M_PI)) * std::sin(n * M_PI * x_over_l) *
                        std::exp(-n * n * M_PI * M_PI * tau);
    s -= term;
    if (std::abs(term) < 1e-15 && n > 3) break;
  }
  return s;
}

struct Slab {
  fem::Mesh mesh;
  fem::DofMap dm;
  MaterialParams m;

  Slab(int nx, bool left_bc, bool right_bc)
      : mesh(fem::build_rect_mesh(1.0, 0.05, nx, 1)), dm(mesh.n_nodes(), 1), m(c110()) {
    if (left_bc)
      for (int n : mesh.left_edge) dm.set_dirichlet(n, 0, 0.0);
    if (right_bc)
      for (int n : mesh.right_edge) dm.set_dirichlet(n, 0, 0.0);
    dm.finalize();
  }
};

}  // namespace

TEST_CASE("effective diffusivity amplification") {
  const auto m = c110();
  CHECK(diff::effective_diffusivity(0.0, m) == doctest::Approx(1.4e-4));
  CHECK(diff::effective_diffusivity(0.8, m) == doctest::Approx(1.4e-4));
  CHECK(diff::effective_diffusivity(1.0, m) == doctest::Approx(1.4e-4 * 201.0));
  CHECK(diff::effective_diffusivity(0.5, m) == doctest::Approx(1.4e-4));  // below threshold
}

TEST_CASE("equilibrium enrichment factor") {
  auto m = c110();
  m.T = 297.0;
  CHECK(diff::steady_amplification(0.0, m) == doctest::Approx(1.0));
  CHECK(diff::steady_amplification(1000.0, m) == doctest::Approx(2.25).epsilon(2e-3));
  const double a1 = diff::steady_amplification(700.0, m);
  const double a2 = diff::steady_amplification(1400.0, m);
  CHECK(a2 == doctest::Approx(a1 * a1).epsilon(1e-12));
}

TEST_CASE("slab transient matches the Fourier series") {
  Slab s(80, true, true);
  const double Cs = units::wtppm_to_molmm3(1.0);
  for (int n : s.mesh.left_edge) s.dm.update_value(n, 0, Cs);

  fem::FieldProblem fp(s.mesh, s.dm, fem::LinearSolver::Kind::general);
  const Eigen::VectorXd sigma_h = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  const Eigen::VectorXd phi = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.mesh.n_nodes());

  const double l = 1.0, D = s.m.D0;
  const double tau_end = 1.0;
  const int nsteps = 20;
  const double dt = tau_end * l * l / D / nsteps;

  for (int step = 1; step <= nsteps; ++step) {
    fem::assemble_diffusion(fp, c, sigma_h, phi, dt, s.m, fem::AssemblyMode::serial);
    fp.solver().solve(fp.sys());
    for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n) {
      const int e = s.dm.eq(static_cast<int>(n), 0);
      c[n] = e >= 0 ? fp.sys().x[e] : s.dm.prescribed(static_cast<int>(n), 0);
    }
    // the transient itself stays close to the series at every sampled step
    const double tau = step * dt * D / (l * l);
    double err2 = 0, ref2 = 0;
    for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n) {
      const double exact = Cs * membrane_series(s.mesh.X[n] / l, tau);
      err2 += (c[n] - exact) * (c[n] - exact);
      ref2 += exact * exact;
    }
    CHECK(std::sqrt(err2 / ref2) < 2e-2);
    if (step == nsteps) CHECK(std::sqrt(err2 / ref2) < 1e-3);
  }
}

TEST_CASE("uniform hydrostatic stress contributes nothing") {
  Slab s(20, true, false);
  const double Cs = units::wtppm_to_molmm3(2.0);
  for (int n : s.mesh.left_edge) s.dm.update_value(n, 0, Cs);
  const Eigen::VectorXd phi = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  const double dt = 500.0;

  fem::FieldProblem fp1(s.mesh, s.dm, fem::LinearSolver::Kind::general);
  fem::assemble_diffusion(fp1, c0, Eigen::VectorXd::Zero(s.mesh.n_nodes()), phi, dt, s.m,
                          fem::AssemblyMode::serial);
  fp1.solver().solve(fp1.sys());
  const Eigen::VectorXd x_fick = fp1.sys().x;

  fem::FieldProblem fp2(s.mesh, s.dm, fem::LinearSolver::Kind::general);
  fem::assemble_diffusion(fp2, c0, Eigen::VectorXd::Constant(s.mesh.n_nodes(), 750.0), phi, dt,
                          s.m, fem::AssemblyMode::serial);
  fp2.solver().solve(fp2.sys());
  CHECK((fp2.sys().x - x_fick).lpNorm<Eigen::Infinity>() <=
        1e-12 * x_fick.lpNorm<Eigen::Infinity>());
}

TEST_CASE("closed system conserves total hydrogen mass") {
  Slab s(40, false, false);  // no Dirichlet anywhere
  Eigen::VectorXd c(s.mesh.n_nodes());
  for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n) {
    const double x = s.mesh.X[n];
    c[n] = std::exp(-(x - 0.5) * (x - 0.5) / 0.01);
  }
  // non-uniform frozen stress field keeps the drift term active
  Eigen::VectorXd sh(s.mesh.n_nodes());
  for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n)
    sh[n] = 900.0 * std::sin(M_PI * s.mesh.X[n]);
  const Eigen::VectorXd phi = Eigen::VectorXd::Zero(s.mesh.n_nodes());

  fem::FieldProblem fp(s.mesh, s.dm, fem::LinearSolver::Kind::general);
  const double mass0 = fem::integrate_nodal(s.mesh, c);
  for (int step = 0; step < 10; ++step) {
    fem::assemble_diffusion(fp, c, sh, phi, 300.0, s.m, fem::AssemblyMode::serial);
    fp.solver().solve(fp.sys());
    for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n)
      c[n] = fp.sys().x[s.dm.eq(static_cast<int>(n), 0)];
    CHECK(fem::integrate_nodal(s.mesh, c) == doctest::Approx(mass0).epsilon(1e-8));
  }
  // and the drift really moved hydrogen toward the stress peak
  double cmax_x = 0;
  double cmax = -1;
  for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n)
    if (c[n] > cmax) {
      cmax = c[n];
      cmax_x = s.mesh.X[n];
    }
  CHECK(std::abs(cmax_x - 0.5) < 0.2);
  CHECK(cmax < 1.0);  // diffusion spreads the blob
}

TEST_CASE("comparison principle holds in the Fickian limit") {
  Slab s(60, true, false);
  const double Cs = units::wtppm_to_molmm3(1.0);
  for (int n : s.mesh.left_edge) s.dm.update_value(n, 0, Cs);
  const Eigen::VectorXd sh = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  const Eigen::VectorXd phi = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  fem::FieldProblem fp(s.mesh, s.dm, fem::LinearSolver::Kind::general);
  const double neg_tol = units::wtppm_to_molmm3(1e-6);
  for (int step = 0; step < 30; ++step) {
    fem::assemble_diffusion(fp, c, sh, phi, 400.0, s.m, fem::AssemblyMode::serial);
    fp.solver().solve(fp.sys());
    for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n) {
      const int e = s.dm.eq(static_cast<int>(n), 0);
      c[n] = e >= 0 ? fp.sys().x[e] : Cs;
    }
    CHECK(c.minCoeff() >= -neg_tol);
  }
}

TEST_CASE("steady state reproduces the analytic enrichment within 2%") {
  Slab s(80, true, true);
  auto& m = s.m;
  const double Cs = units::wtppm_to_molmm3(3.0);
  for (int n : s.mesh.left_edge) s.dm.update_value(n, 0, Cs);
  for (int n : s.mesh.right_edge) s.dm.update_value(n, 0, Cs);

  Eigen::VectorXd sh(s.mesh.n_nodes());
  for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n)
    sh[n] = 600.0 * std::sin(M_PI * s.mesh.X[n]);  // zero at both Dirichlet ends
  const Eigen::VectorXd phi = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.mesh.n_nodes());
  fem::FieldProblem fp(s.mesh, s.dm, fem::LinearSolver::Kind::general);
  // backward Euler with huge steps converges onto the steady solution
  for (int step = 0; step < 4; ++step) {
    fem::assemble_diffusion(fp, c, sh, phi, 1e9, s.m, fem::AssemblyMode::serial);
    fp.solver().solve(fp.sys());
    for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n) {
      const int e = s.dm.eq(static_cast<int>(n), 0);
      c[n] = e >= 0 ? fp.sys().x[e] : Cs;
    }
  }
  for (std::size_t n = 0; n < s.mesh.n_nodes(); ++n) {
    const double expected = Cs * diff::steady_amplification(sh[n], m);
    CHECK(c[n] == doctest::Approx(expected).epsilon(0.02));
  }
}

TEST_CASE("environment schedule: interpolation, clamping, file round trip") {
  diff::EnvSchedule s;
  s.t_hours = {0.0, 10.0, 24.0, 360.0};
  s.c_wtppm = {0.0, 6.0, 7.0, 3.0};
  s.validate();
  CHECK(s.eval_wtppm(0.0) == 0.0);
  CHECK(s.eval_wtppm(units::hours_to_s(5.0)) == doctest::Approx(3.0));
  CHECK(s.eval_wtppm(units::hours_to_s(17.0)) == doctest::Approx(6.5));
  CHECK(s.eval_wtppm(units::hours_to_s(720.0)) == doctest::Approx(3.0));  // clamped
  CHECK(s.peak() == doctest::Approx(7.0));

  TempDir td("sched");
  s.to_file(td.file("s.txt"));
  const auto r = diff::EnvSchedule::from_file(td.file("s.txt"));
  REQUIRE(r.t_hours.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(r.t_hours[i] == doctest::Approx(s.t_hours[i]).epsilon(1e-9));
    CHECK(r.c_wtppm[i] == doctest::Approx(s.c_wtppm[i]).epsilon(1e-9));
  }

  diff::EnvSchedule bad;
  bad.t_hours = {0.0, 0.0};
  bad.c_wtppm = {1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
