#include "sentsim/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "sentsim/phasefield.hpp"
#include "sentsim/units.hpp"

namespace sentsim::couple {

std::pair<fem::DofMap, int> apply_constant_load(const fem::Mesh& mesh) {
  if (mesh.top_edge.empty()) throw ConfigError("apply_constant_load: empty top-edge set");
  fem::DofMap dm(mesh.n_nodes(), 2);
  for (int n : mesh.ligament) dm.set_dirichlet(n, 1, 0.0);  // symmetry u_y = 0
  for (int n : mesh.top_edge) dm.set_dirichlet(n, 0, 0.0);  // no horizontal translation
  const int group = dm.add_alias_group(mesh.top_edge, 1);   // rigid vertical motion
  dm.finalize();
  const int master = dm.group_eq(group);
  return {std::move(dm), master};
}

CoupledProblem::CoupledProblem(const fem::Mesh& mesh, const MaterialParams& m,
                               const StepControls& sc, const diff::EnvSchedule& schedule,
                               double P_newton, double thickness_mm, fem::AssemblyMode mode,
                               bool evolve_phase, bool evolve_diffusion)
    : mesh_(&mesh),
      mat_(m),
      sc_(sc),
      schedule_(schedule),
      thickness_(thickness_mm),
      mode_(mode),
      evolve_phase_(evolve_phase),
      evolve_diffusion_(evolve_diffusion),
      dm_mech_(1, 2),
      dm_phase_(1, 1),
      dm_conc_(1, 1) {
  mat_.validate();
  sc_.validate();
  schedule_.validate();
  if (!(thickness_ > 0)) throw ConfigError("CoupledProblem: thickness must be positive");

  auto [dm, master_eq] = apply_constant_load(mesh);
  dm_mech_ = std::move(dm);
  master_eq_ = master_eq;

  dm_phase_ = fem::DofMap(mesh.n_nodes(), 1);
  for (int n : mesh.crack_face) dm_phase_.set_dirichlet(n, 0, 1.0);
  dm_phase_.finalize();

  // Explicit chemical Dirichlet on the outer boundary; crack faces rely on the
  // damage-amplified diffusivity.
  dm_conc_ = fem::DofMap(mesh.n_nodes(), 1);
  conc_bc_nodes_ = mesh.left_edge;
  conc_bc_nodes_.insert(conc_bc_nodes_.end(), mesh.right_edge.begin(), mesh.right_edge.end());
  std::sort(conc_bc_nodes_.begin(), conc_bc_nodes_.end());
  conc_bc_nodes_.erase(std::unique(conc_bc_nodes_.begin(), conc_bc_nodes_.end()),
                       conc_bc_nodes_.end());
  for (int n : conc_bc_nodes_) dm_conc_.set_dirichlet(n, 0, 0.0);
  dm_conc_.finalize();

  fp_mech_ = std::make_unique<fem::FieldProblem>(mesh, dm_mech_, fem::LinearSolver::Kind::spd);
  fp_phase_ = std::make_unique<fem::FieldProblem>(mesh, dm_phase_, fem::LinearSolver::Kind::spd);
  fp_conc_ = std::make_unique<fem::FieldProblem>(mesh, dm_conc_, fem::LinearSolver::Kind::general);

  f_ext_eq_ = Eigen::VectorXd::Zero(dm_mech_.n_eq());
  f_int_full_ = Eigen::VectorXd::Zero(2 * mesh.n_nodes());

  st_.u = Eigen::VectorXd::Zero(2 * mesh.n_nodes());
  st_.phi = Eigen::VectorXd::Zero(mesh.n_nodes());
  st_.conc = Eigen::VectorXd::Zero(mesh.n_nodes());
  st_.qps.resize(mesh.n_elems() * mesh.nqp);
  st_.P = P_newton;
  st_.dt = sc_.dt_initial;
  trial_ = st_.qps;
  H_qp_.assign(st_.qps.size(), 0.0);

  ligament_sorted_ = mesh.ligament;
  std::sort(ligament_sorted_.begin(), ligament_sorted_.end(),
            [&](int a, int b) { return mesh.X[a] < mesh.X[b]; });

  // psi_p as printed is nonzero at eps_p = 0.
  const double psi_p0 = mech::plastic_energy(0.0, mat_);
  for (auto& q : st_.qps) q.psi_p = psi_p0;
}

CoupledProblem::~CoupledProblem() = default;

double CoupledProblem::ramp_factor(double t) const {
  if (sc_.ramp_s <= 0) return 1.0;
  return std::min(1.0, t / sc_.ramp_s);
}

void CoupledProblem::apply_schedule_bc(double t) {
  const double c = units::wtppm_to_molmm3(schedule_.eval_wtppm(t));
  for (int n : conc_bc_nodes_) dm_conc_.update_value(n, 0, c);
}

void CoupledProblem::initialize() {
  // Initial phase field: Dirichlet strip relaxed through the screened-Poisson
  // operator with the (tiny) initial history.
  for (std::size_t i = 0; i < H_qp_.size(); ++i)
    H_qp_[i] = pf::update_history(st_.qps[i].psi_e_plus, st_.qps[i].psi_p, st_.qps[i].He,
                                  mat_.beta).H;
  fem::assemble_phase(*fp_phase_, H_qp_, st_.conc, mat_, mode_);
  fp_phase_->solver().solve(fp_phase_->sys());
  const Eigen::VectorXd& x = fp_phase_->sys().x;
  for (std::size_t n = 0; n < mesh_->n_nodes(); ++n) {
    const int e = dm_phase_.eq(static_cast<int>(n), 0);
    double v = e >= 0 ? x[e] : dm_phase_.prescribed(static_cast<int>(n), 0);
    st_.phi[n] = std::min(1.0, std::max(0.0, v));
  }
  update_extent();
}

void CoupledProblem::update_extent() {
  double ext = mesh_->a0;
  for (int n : ligament_sorted_)
    if (st_.phi[n] > sc_.phi_crack) ext = std::max(ext, mesh_->X[n]);
  st_.crack_extent = std::max(st_.crack_extent, ext);
}

double CoupledProblem::ligament_length() const { return mesh_->W - mesh_->a0; }

Eigen::VectorXd CoupledProblem::sigma_h_nodal() const {
  return fem::recover_sigma_h(*mesh_, st_.qps, mode_);
}

Eigen::VectorXd CoupledProblem::d_eff_nodal() const {
  Eigen::VectorXd d(mesh_->n_nodes());
  for (std::size_t n = 0; n < mesh_->n_nodes(); ++n)
    d[n] = diff::effective_diffusivity(st_.phi[n], mat_);
  return d;
}

CoupledProblem::StepStatus CoupledProblem::staggered_step(double dt, double& dphi_accept) {
  const double t_new = st_.time + dt;

  // Working fields start from the last accepted state.
  Eigen::VectorXd u_w = st_.u;
  Eigen::VectorXd phi_w = st_.phi;
  Eigen::VectorXd conc_w = st_.conc;

  const double p_line = st_.P * ramp_factor(t_new) / thickness_;  // N per mm thickness
  f_ext_eq_.setZero();
  f_ext_eq_[master_eq_] = p_line;
  apply_schedule_bc(t_new);

  int newton_total = 0;
  int pass = 0;
  bool converged = false;
  Eigen::VectorXd sigma_h;

  for (pass = 1; pass <= sc_.stagger_max; ++pass) {
    // (1) mechanical equilibrium at fixed phi, C
    try {
      newton_total += fem::solve_mechanics(*fp_mech_, u_w, st_.qps, phi_w, mat_, f_ext_eq_,
                                           trial_, &f_int_full_, sc_.newton, mode_);
    } catch (const SolverError&) {
      return StepStatus::mech_fail;
    }

    // (2) history update at the trial state
    for (std::size_t i = 0; i < H_qp_.size(); ++i)
      H_qp_[i] =
          pf::update_history(trial_[i].psi_e_plus, trial_[i].psi_p, st_.qps[i].He, mat_.beta).H;

    double dphi = 0.0;
    if (evolve_phase_) {
      // (3) phase subproblem at fixed H and Gc(C), lagged one pass
      fem::assemble_phase(*fp_phase_, H_qp_, conc_w, mat_, mode_);
      fp_phase_->solver().solve(fp_phase_->sys());
      const Eigen::VectorXd& x = fp_phase_->sys().x;
      for (std::size_t n = 0; n < mesh_->n_nodes(); ++n) {
        const int e = dm_phase_.eq(static_cast<int>(n), 0);
        double v = e >= 0 ? x[e] : 1.0;
        if (v < -1e-12 || v > 1.0 + 1e-12) ++st_.phi_clamp_events;
        v = std::min(1.0, std::max(0.0, v));
        v = std::max(v, st_.phi[n]);  // irreversibility vs last accepted state
        dphi = std::max(dphi, std::abs(v - phi_w[n]));
        phi_w[n] = v;
      }
    }

    // failure can be detected mid-iteration: unstable propagation plays out
    // across staggered passes under load control
    {
      double ext = mesh_->a0;
      for (int n : ligament_sorted_)
        if (phi_w[n] > sc_.phi_crack) ext = std::max(ext, mesh_->X[n]);
      if (ext - mesh_->a0 >= sc_.failure_extent_frac * ligament_length()) {
        st_.u = u_w;
        st_.phi = phi_w;
        st_.conc = conc_w;
        for (std::size_t i = 0; i < st_.qps.size(); ++i) {
          const double He = pf::update_history(trial_[i].psi_e_plus, trial_[i].psi_p,
                                               st_.qps[i].He, mat_.beta).He;
          st_.qps[i] = trial_[i];
          st_.qps[i].He = He;
        }
        st_.time = t_new;
        st_.last_passes = pass;
        st_.last_newton = newton_total;
        update_extent();
        return StepStatus::fractured;
      }
    }

    if (evolve_diffusion_) {
      // (4) transport at fixed sigma_h and phi, integrating from the accepted C
      sigma_h = fem::recover_sigma_h(*mesh_, trial_, mode_);
      fem::assemble_diffusion(*fp_conc_, st_.conc, sigma_h, phi_w, dt, mat_, mode_);
      fp_conc_->solver().solve(fp_conc_->sys());
      const Eigen::VectorXd& x = fp_conc_->sys().x;
      long neg = 0;
      const double neg_tol = units::wtppm_to_molmm3(1e-6);
      for (std::size_t n = 0; n < mesh_->n_nodes(); ++n) {
        const int e = dm_conc_.eq(static_cast<int>(n), 0);
        conc_w[n] = e >= 0 ? x[e] : dm_conc_.prescribed(static_cast<int>(n), 0);
        if (conc_w[n] < -neg_tol) ++neg;
      }
      if (neg > 0) {
        st_.neg_c_events += neg;
        if (neg > sc_.neg_c_node_frac * static_cast<double>(mesh_->n_nodes()))
          return StepStatus::no_converge;  // suggests a smaller dt
      }
    }

    if (!evolve_phase_ || dphi < sc_.stagger_tol) {
      converged = true;
      dphi_accept = (phi_w - st_.phi).lpNorm<Eigen::Infinity>();
      break;
    }
  }
  if (!converged) return StepStatus::no_converge;

  // Commit.
  st_.u = u_w;
  st_.phi = phi_w;
  st_.conc = conc_w;
  for (std::size_t i = 0; i < st_.qps.size(); ++i) {
    const double He =
        pf::update_history(trial_[i].psi_e_plus, trial_[i].psi_p, st_.qps[i].He, mat_.beta).He;
    st_.qps[i] = trial_[i];
    st_.qps[i].He = He;
  }
  st_.time = t_new;
  st_.last_passes = pass;
  st_.last_newton = newton_total;
  st_.accepted_steps += 1;

  double r = 0.0;
  for (int n : mesh_->ligament) r += f_int_full_[2 * n + 1];
  st_.reaction = std::abs(r) * thickness_;
  st_.peak_c_wtppm = units::molmm3_to_wtppm(st_.conc.maxCoeff());
  if (!sigma_h.size()) sigma_h = fem::recover_sigma_h(*mesh_, st_.qps, mode_);
  st_.peak_sigma_h = sigma_h.maxCoeff();
  update_extent();
  return StepStatus::converged;
}

Outcome CoupledProblem::advance(double t_stop_s) {
  if (failed_) return Outcome::failed;
  double dt = std::min({std::max(st_.dt, sc_.dt_min), sc_.dt_max, t_stop_s - st_.time});
  if (dt <= 0) return Outcome::intact;

  for (;;) {
    double dphi_accept = 0.0;
    const StepStatus s = staggered_step(dt, dphi_accept);
    switch (s) {
      case StepStatus::fractured:
        failed_ = true;
        note_ = "crack extent reached " + std::to_string(sc_.failure_extent_frac * 100) +
                "% of the ligament";
        return Outcome::failed;
      case StepStatus::converged: {
        // adapt dt for the next step
        if (dphi_accept > sc_.dphi_refine)
          st_.dt = std::max(dt * 0.5, sc_.dt_min);
        else if (dphi_accept < sc_.dphi_grow && st_.last_passes <= 4)
          st_.dt = std::min(dt * sc_.dt_growth, sc_.dt_max);
        else
          st_.dt = dt;
        return Outcome::intact;
      }
      case StepStatus::mech_fail:
        if (dt <= sc_.dt_min * (1 + 1e-12)) {
          // cannot equilibrate the constant load: plastic collapse of the
          // remaining ligament
          failed_ = true;
          st_.time += dt;
          note_ = "mechanical equilibrium lost at dt_min (ligament collapse)";
          return Outcome::failed;
        }
        dt = std::max(dt * 0.5, sc_.dt_min);
        break;
      case StepStatus::no_converge:
        if (dt <= sc_.dt_min * (1 + 1e-12)) {
          inconclusive_ = true;
          note_ = "staggered iteration cap at dt_min";
          throw StepError("staggered step failed to converge at dt_min (t = " +
                          std::to_string(st_.time) + " s)");
        }
        dt = std::max(dt * 0.5, sc_.dt_min);
        break;
    }
  }
}

RunResult CoupledProblem::run(double horizon_h,
                              const std::function<void(const SimState&)>& on_accept) {
  const double t_end = units::hours_to_s(horizon_h);
  if (st_.accepted_steps == 0 && st_.time == 0.0) initialize();
  while (st_.time < t_end - 1e-9) {
    const Outcome o = advance(t_end);
    if (on_accept) on_accept(st_);
    if (o == Outcome::failed)
      return {Outcome::failed, units::s_to_hours(st_.time), note_};
  }
  return {Outcome::intact, horizon_h, "runout"};
}

// ---------------------------------------------------------------------------
// Checkpointing: native-endian binary dump of the full SimState.
// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'S', 'C', 'K', 'P', 'T', '0', '1', '\n'};

template <typename T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::ifstream& i, T& v) {
  i.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void CoupledProblem::save_checkpoint(const std::string& path) const {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw Error("checkpoint: cannot write " + path);
  o.write(kMagic, sizeof kMagic);
  const std::uint64_t nn = mesh_->n_nodes(), nq = st_.qps.size();
  put(o, nn);
  put(o, nq);
  put(o, st_.time);
  put(o, st_.dt);
  put(o, st_.P);
  put(o, st_.crack_extent);
  put(o, st_.accepted_steps);
  put(o, st_.neg_c_events);
  put(o, st_.phi_clamp_events);
  o.write(reinterpret_cast<const char*>(st_.u.data()), 2 * nn * sizeof(double));
  o.write(reinterpret_cast<const char*>(st_.phi.data()), nn * sizeof(double));
  o.write(reinterpret_cast<const char*>(st_.conc.data()), nn * sizeof(double));
  o.write(reinterpret_cast<const char*>(st_.qps.data()), nq * sizeof(mech::QPState));
  if (!o) throw Error("checkpoint: write failed for " + path);
}

void CoupledProblem::load_checkpoint(const std::string& path) {
  std::ifstream i(path, std::ios::binary);
  if (!i) throw Error("checkpoint: cannot open " + path);
  char magic[8];
  i.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error("checkpoint: bad magic in " + path);
  std::uint64_t nn = 0, nq = 0;
  get(i, nn);
  get(i, nq);
  if (nn != mesh_->n_nodes() || nq != st_.qps.size())
    throw Error("checkpoint: size mismatch (different mesh?)");
  get(i, st_.time);
  get(i, st_.dt);
  get(i, st_.P);
  get(i, st_.crack_extent);
  get(i, st_.accepted_steps);
  get(i, st_.neg_c_events);
  get(i, st_.phi_clamp_events);
  i.read(reinterpret_cast<char*>(st_.u.data()), 2 * nn * sizeof(double));
  i.read(reinterpret_cast<char*>(st_.phi.data()), nn * sizeof(double));
  i.read(reinterpret_cast<char*>(st_.conc.data()), nn * sizeof(double));
  i.read(reinterpret_cast<char*>(st_.qps.data()), nq * sizeof(mech::QPState));
  if (!i) throw Error("checkpoint: truncated file " + path);
}

}  // namespace sentsim::couple
