#include "sentsim/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>

#include "sentsim/phasefield.hpp"
#include "sentsim/diffusion.hpp"
#include "sentsim/units.hpp"

namespace sentsim::fem {

namespace {

template <bool Atomic>
inline void add(double* dst, double v) {
  if constexpr (Atomic) {
#pragma omp atomic
    *dst += v;
  } else {
    *dst += v;
  }
}

// Exceptions must not escape an OpenMP region; capture the first one and
// rethrow after the loop.
struct LoopError {
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::string msg;

  void capture(const std::exception& ex) {
    std::lock_guard<std::mutex> lk(mu);
    if (!failed.load()) msg = ex.what();
    failed.store(true);
  }
  void rethrow() const {
    if (failed.load()) throw SolverError(msg);
  }
};

}  // namespace

FieldProblem::FieldProblem(const Mesh& mesh, const DofMap& dm, LinearSolver::Kind kind)
    : mesh_(&mesh), dm_(&dm), solver_(kind), edofs_(8 * dm.n_comp()) {
  const int nc = dm.n_comp();
  // Pattern from free-free pairs.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_elems() * edofs_ * edofs_ / 2);
  for (const auto& el : mesh.elems) {
    for (int a = 0; a < 8; ++a)
      for (int ca = 0; ca < nc; ++ca) {
        const int r = dm.eq(el[a], ca);
        if (r < 0) continue;
        for (int b = 0; b < 8; ++b)
          for (int cb = 0; cb < nc; ++cb) {
            const int c = dm.eq(el[b], cb);
            if (c >= 0) trips.emplace_back(r, c, 0.0);
          }
      }
  }
  sys_.A.resize(dm.n_eq(), dm.n_eq());
  sys_.A.setFromTriplets(trips.begin(), trips.end());
  sys_.A.makeCompressed();
  sys_.b.resize(dm.n_eq());

  // Scatter cache: per element, per (row, col) local pair.
  scatter_idx_.assign(mesh.n_elems() * edofs_ * edofs_, -1);
  eq_cache_.assign(mesh.n_elems() * edofs_, -1);
  const int* outer = sys_.A.outerIndexPtr();
  const int* inner = sys_.A.innerIndexPtr();
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    const auto& el = mesh.elems[e];
    int* eqs = &eq_cache_[e * edofs_];
    for (int a = 0; a < 8; ++a)
      for (int ca = 0; ca < nc; ++ca) eqs[a * nc + ca] = dm.eq(el[a], ca);
    int* idx = &scatter_idx_[e * edofs_ * edofs_];
    for (int i = 0; i < edofs_; ++i) {
      const int r = eqs[i];
      for (int j = 0; j < edofs_; ++j, ++idx) {
        const int c = eqs[j];
        if (r < 0) {
          *idx = -1;
        } else if (c < 0) {
          // prescribed column: remember the raw dof to fetch the value later
          const int node = el[j / nc], comp = j % nc;
          *idx = -2 - (node * nc + comp);
        } else {
          // ColMajor: locate (r, c) inside column c
          const int* lo = inner + outer[c];
          const int* hi = inner + outer[c + 1];
          const int* it = std::lower_bound(lo, hi, r);
          *idx = static_cast<int>(it - inner);
        }
      }
    }
  }
}

void FieldProblem::zero() {
  std::fill(sys_.A.valuePtr(), sys_.A.valuePtr() + sys_.A.nonZeros(), 0.0);
  sys_.b.setZero();
}

template <bool Atomic>
void FieldProblem::scatter(std::size_t e, const double* Ke, const double* fe,
                           bool fold_dirichlet) {
  const int n = edofs_;
  const int* idx = &scatter_idx_[e * n * n];
  const int* eqs = &eq_cache_[e * n];
  double* vals = sys_.A.valuePtr();
  double* b = sys_.b.data();
  const int nc = dm_->n_comp();
  for (int i = 0; i < n; ++i) {
    const int r = eqs[i];
    if (r >= 0 && fe) add<Atomic>(&b[r], fe[i]);
    for (int j = 0; j < n; ++j) {
      const int s = idx[i * n + j];
      if (s >= 0) {
        add<Atomic>(&vals[s], Ke[i * n + j]);
      } else if (s <= -2 && r >= 0 && fold_dirichlet) {
        const int raw = -2 - s;
        const double v = dm_->prescribed(raw / nc, raw % nc);
        if (v != 0.0) add<Atomic>(&b[r], -Ke[i * n + j] * v);
      }
    }
  }
}

template <bool Atomic>
void FieldProblem::scatter_vec(std::size_t e, const double* fe) {
  const int n = edofs_;
  const int* eqs = &eq_cache_[e * n];
  double* b = sys_.b.data();
  for (int i = 0; i < n; ++i)
    if (eqs[i] >= 0) add<Atomic>(&b[eqs[i]], fe[i]);
}

template void FieldProblem::scatter<true>(std::size_t, const double*, const double*, bool);
template void FieldProblem::scatter<false>(std::size_t, const double*, const double*, bool);
template void FieldProblem::scatter_vec<true>(std::size_t, const double*);
template void FieldProblem::scatter_vec<false>(std::size_t, const double*);

// ---------------------------------------------------------------------------
// Mechanics
// ---------------------------------------------------------------------------

namespace {

template <bool Atomic>
void mech_element_loop(FieldProblem& fp, const Eigen::VectorXd& u_full,
                       const std::vector<mech::QPState>& committed,
                       const Eigen::VectorXd& phi_nodal, const MaterialParams& m,
                       std::vector<mech::QPState>& trial, Eigen::VectorXd* f_int_full) {
  const Mesh& mesh = fp.mesh();
  const long ne = static_cast<long>(mesh.n_elems());
  LoopError err;

#pragma omp parallel for schedule(static) if (Atomic)
  for (long e = 0; e < ne; ++e) {
    if (err.failed.load(std::memory_order_relaxed)) continue;
    try {
    const auto& el = mesh.elems[e];
    Eigen::Matrix<double, 16, 16> Ke = Eigen::Matrix<double, 16, 16>::Zero();
    Eigen::Matrix<double, 16, 1> fe = Eigen::Matrix<double, 16, 1>::Zero();
    double ux[8], uy[8], phin[8];
    for (int a = 0; a < 8; ++a) {
      ux[a] = u_full[2 * el[a]];
      uy[a] = u_full[2 * el[a] + 1];
      phin[a] = phi_nodal[el[a]];
    }
    for (int q = 0; q < mesh.nqp; ++q) {
      const QPData& d = mesh.qp_at(e, q);
      Sym2 eps;
      double phi = 0.0;
      for (int a = 0; a < 8; ++a) {
        eps.xx += d.dNdx[a] * ux[a];
        eps.yy += d.dNdy[a] * uy[a];
        eps.xy += 0.5 * (d.dNdy[a] * ux[a] + d.dNdx[a] * uy[a]);
        phi += d.N[a] * phin[a];
      }
      phi = std::min(1.0, std::max(0.0, phi));
      const std::size_t qi = static_cast<std::size_t>(e) * mesh.nqp + q;
      mech::PointResult pr = mech::return_map(eps, committed[qi], phi, m);
      if (!pr.sigma.finite())
        throw SolverError("assemble: non-finite stress in element " + std::to_string(e));
      trial[qi] = pr.next;

      const double w = d.wdetJ;
      // fe += B^T sigma, Ke += B^T D B with B built from cached gradients
      for (int a = 0; a < 8; ++a) {
        const double bx = d.dNdx[a], by = d.dNdy[a];
        fe[2 * a] += w * (bx * pr.sigma.xx + by * pr.sigma.xy);
        fe[2 * a + 1] += w * (by * pr.sigma.yy + bx * pr.sigma.xy);
      }
      const Eigen::Matrix3d& D = pr.D;
      for (int a = 0; a < 8; ++a) {
        const double bxa = d.dNdx[a], bya = d.dNdy[a];
        // rows of B^T D for node a: [bxa*D00+bya*D20, ...]
        const double r0x = bxa * D(0, 0) + bya * D(2, 0);
        const double r0y = bxa * D(0, 1) + bya * D(2, 1);
        const double r0g = bxa * D(0, 2) + bya * D(2, 2);
        const double r1x = bya * D(1, 0) + bxa * D(2, 0);
        const double r1y = bya * D(1, 1) + bxa * D(2, 1);
        const double r1g = bya * D(1, 2) + bxa * D(2, 2);
        for (int b = 0; b < 8; ++b) {
          const double bxb = d.dNdx[b], byb = d.dNdy[b];
          Ke(2 * a, 2 * b) += w * (r0x * bxb + r0g * byb);
          Ke(2 * a, 2 * b + 1) += w * (r0y * byb + r0g * bxb);
          Ke(2 * a + 1, 2 * b) += w * (r1x * bxb + r1g * byb);
          Ke(2 * a + 1, 2 * b + 1) += w * (r1y * byb + r1g * bxb);
        }
      }
    }
    fp.scatter<Atomic>(e, Ke.data(), fe.data(), /*fold_dirichlet=*/false);
    if (f_int_full) {
      double* fi = f_int_full->data();
      for (int a = 0; a < 8; ++a) {
        add<Atomic>(&fi[2 * el[a]], fe[2 * a]);
        add<Atomic>(&fi[2 * el[a] + 1], fe[2 * a + 1]);
      }
    }
    } catch (const std::exception& ex) {
      err.capture(ex);
    }
  }
  err.rethrow();
}

}  // namespace

MechAssembly assemble_mechanics(FieldProblem& fp, const Eigen::VectorXd& u_full,
                                const std::vector<mech::QPState>& committed,
                                const Eigen::VectorXd& phi_nodal, const MaterialParams& m,
                                const Eigen::VectorXd& f_ext_eq,
                                std::vector<mech::QPState>& trial, Eigen::VectorXd* f_int_full,
                                AssemblyMode mode) {
  fp.zero();
  if (f_int_full) f_int_full->setZero();
  trial.resize(committed.size());
  if (mode == AssemblyMode::parallel)
    mech_element_loop<true>(fp, u_full, committed, phi_nodal, m, trial, f_int_full);
  else
    mech_element_loop<false>(fp, u_full, committed, phi_nodal, m, trial, f_int_full);
  // b currently holds the internal force in eq space; turn it into a residual.
  fp.sys().b -= f_ext_eq;
  MechAssembly out;
  out.resnorm_free = fp.sys().b.norm();
  return out;
}

// Note: Ke is row-major in scatter()'s convention while Eigen::Matrix is
// column-major, but every element matrix assembled here is symmetric except
// the diffusion operator, which is assembled into a row-major buffer.

// ---------------------------------------------------------------------------
// Phase field
// ---------------------------------------------------------------------------

namespace {

template <bool Atomic>
void phase_element_loop(FieldProblem& fp, const std::vector<double>& H_qp,
                        const Eigen::VectorXd& conc_nodal, const MaterialParams& m) {
  const Mesh& mesh = fp.mesh();
  const long ne = static_cast<long>(mesh.n_elems());

#pragma omp parallel for schedule(static) if (Atomic)
  for (long e = 0; e < ne; ++e) {
    const auto& el = mesh.elems[e];
    Eigen::Matrix<double, 8, 8> Ke = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 1> fe = Eigen::Matrix<double, 8, 1>::Zero();
    double cn[8];
    for (int a = 0; a < 8; ++a) cn[a] = conc_nodal[el[a]];
    for (int q = 0; q < mesh.nqp; ++q) {
      const QPData& d = mesh.qp_at(e, q);
      double c = 0.0;
      for (int a = 0; a < 8; ++a) c += d.N[a] * cn[a];
      const double c_wtppm = std::max(0.0, units::molmm3_to_wtppm(c));
      const double Gc = pf::gc_of_c(c_wtppm, m);
      const double H = H_qp[static_cast<std::size_t>(e) * mesh.nqp + q];
      const double w = d.wdetJ;
      for (int a = 0; a < 8; ++a) {
        fe[a] += w * 2.0 * H * d.N[a];
        for (int b = 0; b < 8; ++b) {
          Ke(a, b) += w * ((Gc / m.ell + 2.0 * H) * d.N[a] * d.N[b] +
                           Gc * m.ell * (d.dNdx[a] * d.dNdx[b] + d.dNdy[a] * d.dNdy[b]));
        }
      }
    }
    fp.scatter<Atomic>(e, Ke.data(), fe.data(), /*fold_dirichlet=*/true);
  }
}

}  // namespace

void assemble_phase(FieldProblem& fp, const std::vector<double>& H_qp,
                    const Eigen::VectorXd& conc_nodal, const MaterialParams& m,
                    AssemblyMode mode) {
  fp.zero();
  if (mode == AssemblyMode::parallel)
    phase_element_loop<true>(fp, H_qp, conc_nodal, m);
  else
    phase_element_loop<false>(fp, H_qp, conc_nodal, m);
}

// ---------------------------------------------------------------------------
// Diffusion
// ---------------------------------------------------------------------------

namespace {

template <bool Atomic>
void diffusion_element_loop(FieldProblem& fp, const Eigen::VectorXd& c_old_full,
                            const Eigen::VectorXd& sigma_h_nodal, const Eigen::VectorXd& phi_nodal,
                            double dt, const MaterialParams& m) {
  const Mesh& mesh = fp.mesh();
  const long ne = static_cast<long>(mesh.n_elems());
  const double drift_coef = m.V_H / (m.R() * m.T);

#pragma omp parallel for schedule(static) if (Atomic)
  for (long e = 0; e < ne; ++e) {
    const auto& el = mesh.elems[e];
    double Ke[64];
    double fe[8];
    std::fill(Ke, Ke + 64, 0.0);
    std::fill(fe, fe + 8, 0.0);
    double cn[8], shn[8], phin[8];
    for (int a = 0; a < 8; ++a) {
      cn[a] = c_old_full[el[a]];
      shn[a] = sigma_h_nodal[el[a]];
      phin[a] = phi_nodal[el[a]];
    }
    for (int q = 0; q < mesh.nqp; ++q) {
      const QPData& d = mesh.qp_at(e, q);
      double c_old = 0, phi = 0, gsx = 0, gsy = 0;
      for (int a = 0; a < 8; ++a) {
        c_old += d.N[a] * cn[a];
        phi += d.N[a] * phin[a];
        gsx += d.dNdx[a] * shn[a];
        gsy += d.dNdy[a] * shn[a];
      }
      const double D = diff::effective_diffusivity(phi, m);
      const double w = d.wdetJ;
      for (int a = 0; a < 8; ++a) {
        fe[a] += w * d.N[a] * c_old / dt;
        const double adv_a = D * drift_coef * (d.dNdx[a] * gsx + d.dNdy[a] * gsy);
        for (int b = 0; b < 8; ++b) {
          Ke[a * 8 + b] += w * (d.N[a] * d.N[b] / dt +
                                D * (d.dNdx[a] * d.dNdx[b] + d.dNdy[a] * d.dNdy[b]) -
                                adv_a * d.N[b]);
        }
      }
    }
    fp.scatter<Atomic>(e, Ke, fe, /*fold_dirichlet=*/true);
  }
}

}  // namespace

void assemble_diffusion(FieldProblem& fp, const Eigen::VectorXd& c_old_full,
                        const Eigen::VectorXd& sigma_h_nodal, const Eigen::VectorXd& phi_nodal,
                        double dt, const MaterialParams& m, AssemblyMode mode) {
  if (!(dt > 0)) throw StateError("assemble_diffusion: dt must be positive");
  fp.zero();
  if (mode == AssemblyMode::parallel)
    diffusion_element_loop<true>(fp, c_old_full, sigma_h_nodal, phi_nodal, dt, m);
  else
    diffusion_element_loop<false>(fp, c_old_full, sigma_h_nodal, phi_nodal, dt, m);
}

// ---------------------------------------------------------------------------
// Utilities
// ---------------------------------------------------------------------------

Eigen::VectorXd recover_sigma_h(const Mesh& mesh, const std::vector<mech::QPState>& qps,
                                AssemblyMode mode) {
  Eigen::VectorXd num = Eigen::VectorXd::Zero(mesh.n_nodes());
  Eigen::VectorXd den = Eigen::VectorXd::Zero(mesh.n_nodes());
  const long ne = static_cast<long>(mesh.n_elems());
  const bool par = (mode == AssemblyMode::parallel);

#pragma omp parallel for schedule(static) if (par)
  for (long e = 0; e < ne; ++e) {
    const auto& el = mesh.elems[e];
    for (int q = 0; q < mesh.nqp; ++q) {
      const QPData& d = mesh.qp_at(e, q);
      const double sh = mech::hydrostatic_stress(qps[static_cast<std::size_t>(e) * mesh.nqp + q].sigma);
      for (int a = 0; a < 8; ++a) {
        add<true>(&num[el[a]], d.wdetJ * sh);
        add<true>(&den[el[a]], d.wdetJ);
      }
    }
  }
  for (long n = 0; n < num.size(); ++n) num[n] = den[n] > 0 ? num[n] / den[n] : 0.0;
  return num;
}

double integrate_nodal(const Mesh& mesh, const Eigen::VectorXd& nodal) {
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    const auto& el = mesh.elems[e];
    for (int q = 0; q < mesh.nqp; ++q) {
      const QPData& d = mesh.qp_at(e, q);
      double v = 0.0;
      for (int a = 0; a < 8; ++a) v += d.N[a] * nodal[el[a]];
      total += d.wdetJ * v;
    }
  }
  return total;
}

int solve_mechanics(FieldProblem& fp, Eigen::VectorXd& u_full,
                    const std::vector<mech::QPState>& committed, const Eigen::VectorXd& phi_nodal,
                    const MaterialParams& m, const Eigen::VectorXd& f_ext_eq,
                    std::vector<mech::QPState>& trial, Eigen::VectorXd* f_int_full,
                    const NewtonOptions& opt, AssemblyMode mode) {
  const DofMap& dm = fp.dm();
  dm.apply_prescribed(u_full.data());
  const double fref = std::max(f_ext_eq.norm(), opt.tol_abs);

  for (int it = 0; it < opt.max_iter; ++it) {
    const MechAssembly ma =
        assemble_mechanics(fp, u_full, committed, phi_nodal, m, f_ext_eq, trial, f_int_full, mode);
    if (ma.resnorm_free <= std::max(opt.tol_rel * fref, opt.tol_abs)) return it;

    SparseSystem& sys = fp.sys();
    sys.b = -sys.b;
    fp.solver().solve(sys);
    if (!sys.x.allFinite()) throw SolverError("solve_mechanics: non-finite Newton update");

    // u += scatter of the eq-space update (alias groups share their value).
    for (std::size_t n = 0; n < fp.mesh().n_nodes(); ++n)
      for (int c = 0; c < 2; ++c) {
        const int e = dm.eq(static_cast<int>(n), c);
        if (e >= 0) u_full[2 * n + c] += sys.x[e];
      }
  }
  throw SolverError("solve_mechanics: no convergence in " + std::to_string(opt.max_iter) +
                    " iterations");
}

}  // namespace sentsim::fem
