#pragma once

#include <functional>
#include <memory>
#include <string>

#include "sentsim/assembly.hpp"
#include "sentsim/diffusion.hpp"

namespace sentsim::couple {

/// Time stepping and tolerance knobs for the staggered driver.
struct StepControls {
  double dt_initial = 2.0;   // s
  double dt_min = 0.05;      // s
  double dt_max = 14400.0;   // s
  double ramp_s = 10.0;      // load ramp duration
  int stagger_max = 40;
  double stagger_tol = 1e-4;   // inf-norm phi change between passes
  double dphi_refine = 0.10;   // accepted-step phi jump that halves dt
  double dphi_grow = 0.02;     // below this dt grows
  double dt_growth = 1.6;
  double failure_extent_frac = 0.90;
  double phi_crack = 0.95;     // "cracked" threshold for the extent metric
  double neg_c_node_frac = 0.05;  // undershoot fraction treated as instability
  fem::NewtonOptions newton;

  void validate() const {
    if (!(dt_min <= dt_initial && dt_initial <= dt_max))
      throw ConfigError("solver: require dt_min <= dt_initial <= dt_max");
    if (!(stagger_tol > 0) || !(newton.tol_rel > 0))
      throw ConfigError("solver: tolerances must be positive");
    if (stagger_max < 1) throw ConfigError("solver: stagger_max must be >= 1");
  }
};

/// Full simulation state; everything needed for bit-exact restart.
struct SimState {
  double time = 0.0;  // s
  double dt = 0.0;    // adaptive controller state
  Eigen::VectorXd u;     // 2 per node
  Eigen::VectorXd phi;   // 1 per node
  Eigen::VectorXd conc;  // mol/mm^3
  std::vector<mech::QPState> qps;
  double P = 0.0;  // physical load, N
  bool converged = true;
  double crack_extent = 0.0;  // mm
  long accepted_steps = 0;
  long neg_c_events = 0;
  long phi_clamp_events = 0;
  int last_passes = 0;
  int last_newton = 0;
  double reaction = 0.0;       // ligament reaction, N (physical)
  double peak_c_wtppm = 0.0;
  double peak_sigma_h = 0.0;   // MPa
};

enum class Outcome { intact, failed, inconclusive };

struct RunResult {
  Outcome outcome = Outcome::intact;
  double time_h = 0.0;  // failure time, or the horizon for runouts
  std::string note;
};

/// Staggered deformation / fracture / transport driver under constant load.
/// A CoupledProblem owns one simulation; campaigns run independent instances.
class CoupledProblem {
 public:
  /// evolve_phase=false freezes phi at its initial field (stationary-crack
  /// studies); evolve_diffusion=false pins C=0 (hydrogen-free path).
  CoupledProblem(const fem::Mesh& mesh, const MaterialParams& m, const StepControls& sc,
                 const diff::EnvSchedule& schedule, double P_newton, double thickness_mm,
                 fem::AssemblyMode mode = fem::AssemblyMode::serial, bool evolve_phase = true,
                 bool evolve_diffusion = true);
  ~CoupledProblem();

  SimState& state() { return st_; }
  const SimState& state() const { return st_; }
  const fem::Mesh& mesh() const { return *mesh_; }
  const MaterialParams& material() const { return mat_; }

  /// phi0 from the crack Dirichlet strip, u = 0, C = 0.
  void initialize();

  /// One accepted step (with internal dt adaptation). Updates state.
  /// Returns the failure status observed so far.
  Outcome advance(double t_stop_s);

  /// Runs to the horizon or failure; invokes on_accept after every accepted
  /// step (logging, frames, checkpoints).
  RunResult run(double horizon_h, const std::function<void(const SimState&)>& on_accept = {});

  /// Nodal hydrostatic stress recovered from the current quadrature state.
  Eigen::VectorXd sigma_h_nodal() const;
  /// Per-node effective diffusivity (for output frames).
  Eigen::VectorXd d_eff_nodal() const;

  double ligament_length() const;
  double crack_extent() const { return st_.crack_extent; }

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  enum class StepStatus { converged, no_converge, mech_fail, fractured };
  StepStatus staggered_step(double dt, double& dphi_accept);
  void update_extent();
  void apply_schedule_bc(double t);
  double ramp_factor(double t) const;

  const fem::Mesh* mesh_;
  MaterialParams mat_;
  StepControls sc_;
  diff::EnvSchedule schedule_;
  double thickness_;
  fem::AssemblyMode mode_;
  bool evolve_phase_, evolve_diffusion_;
  bool failed_ = false, inconclusive_ = false;
  std::string note_;

  fem::DofMap dm_mech_, dm_phase_, dm_conc_;
  int master_eq_ = -1;
  std::unique_ptr<fem::FieldProblem> fp_mech_, fp_phase_, fp_conc_;
  Eigen::VectorXd f_ext_eq_, f_int_full_;
  std::vector<mech::QPState> trial_;
  std::vector<double> H_qp_;
  std::vector<int> conc_bc_nodes_;
  std::vector<int> ligament_sorted_;  // ligament node ids sorted by x

  SimState st_;
};

/// Rigid-edge constant-load boundary conditions: equal u_y on the top edge via
/// one master equation, u_x = 0 there, u_y = 0 on the ligament. Returns the
/// finalized DofMap and the master equation index.
std::pair<fem::DofMap, int> apply_constant_load(const fem::Mesh& mesh);

}  // namespace sentsim::couple
