#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sentsim/dofmap.hpp"
#include "sentsim/linsolve.hpp"
#include "sentsim/material.hpp"
#include "sentsim/mechanics.hpp"
#include "sentsim/mesh.hpp"

namespace sentsim::fem {

/// Element loops run either as a plain serial reference loop or as an OpenMP
/// loop with atomic scatter-adds. Results agree to roundoff (<=1e-12 relative);
/// the serial path is bit-deterministic.
enum class AssemblyMode { serial, parallel };

/// Sparse operator for one field on one mesh: fixed pattern plus a
/// per-element scatter-index cache so repeated assemblies are allocation-free.
class FieldProblem {
 public:
  FieldProblem(const Mesh& mesh, const DofMap& dm, LinearSolver::Kind kind);

  const Mesh& mesh() const { return *mesh_; }
  const DofMap& dm() const { return *dm_; }
  int ncomp() const { return dm_->n_comp(); }

  SparseSystem& sys() { return sys_; }
  LinearSolver& solver() { return solver_; }

  void zero();
  /// Scatter one element matrix/vector; Ke is (8*ncomp)^2 row-major on the
  /// element dof ordering, fe optional. With fold_dirichlet, Dirichlet columns
  /// are folded into b using the DofMap's prescribed values (value-form
  /// systems); residual-form assemblies carry prescribed values inside the
  /// state and must pass false.
  template <bool Atomic>
  void scatter(std::size_t e, const double* Ke, const double* fe, bool fold_dirichlet);

  /// Scatter only a vector contribution (residual assembly).
  template <bool Atomic>
  void scatter_vec(std::size_t e, const double* fe);

 private:
  const Mesh* mesh_;
  const DofMap* dm_;
  SparseSystem sys_;
  LinearSolver solver_;
  int edofs_;
  std::vector<int> scatter_idx_;  // elem-major: >=0 value slot, -1 drop, -2-d column dof d
  std::vector<int> eq_cache_;     // elem-major row equations
};

// ---------------------------------------------------------------------------
// Field assemblies
// ---------------------------------------------------------------------------

struct MechAssembly {
  double resnorm_free = 0.0;  // ||R_free|| (internal - external)
};

/// Assembles the mechanics tangent and residual about the state u (full dof
/// vector, prescribed entries already applied). Trial quadrature states are
/// written to `trial`; `f_int_full` (optional, size 2*n_nodes) receives the
/// raw internal force vector for reaction recovery.
MechAssembly assemble_mechanics(FieldProblem& fp, const Eigen::VectorXd& u_full,
                                const std::vector<mech::QPState>& committed,
                                const Eigen::VectorXd& phi_nodal, const MaterialParams& m,
                                const Eigen::VectorXd& f_ext_eq,
                                std::vector<mech::QPState>& trial,
                                Eigen::VectorXd* f_int_full, AssemblyMode mode);

/// Phase-field system: Gc(C) (phi/ell - ell lap phi) = 2 (1 - phi) H, with H
/// given per quadrature point and Gc evaluated from the nodal concentration
/// (wt ppm conversion happens inside).
void assemble_phase(FieldProblem& fp, const std::vector<double>& H_qp,
                    const Eigen::VectorXd& conc_nodal, const MaterialParams& m,
                    AssemblyMode mode);

/// Backward-Euler transport step: (M/dt + K_D + K_drift) C = M/dt C_old.
/// sigma_h_nodal in MPa, concentrations in mol/mm^3.
void assemble_diffusion(FieldProblem& fp, const Eigen::VectorXd& c_old_full,
                        const Eigen::VectorXd& sigma_h_nodal, const Eigen::VectorXd& phi_nodal,
                        double dt, const MaterialParams& m, AssemblyMode mode);

// ---------------------------------------------------------------------------
// Field utilities
// ---------------------------------------------------------------------------

/// Patch-based nodal averaging of quadrature-point hydrostatic stress.
Eigen::VectorXd recover_sigma_h(const Mesh& mesh, const std::vector<mech::QPState>& qps,
                                AssemblyMode mode);

/// Integral of a nodal scalar field over the domain.
double integrate_nodal(const Mesh& mesh, const Eigen::VectorXd& nodal);

/// Newton solve of mechanical equilibrium at fixed phi. Returns iteration
/// count; throws SolverError when it fails to converge.
struct NewtonOptions {
  double tol_rel = 1e-8;
  double tol_abs = 1e-8;  // N/mm (per unit thickness)
  int max_iter = 25;
};

int solve_mechanics(FieldProblem& fp, Eigen::VectorXd& u_full,
                    const std::vector<mech::QPState>& committed, const Eigen::VectorXd& phi_nodal,
                    const MaterialParams& m, const Eigen::VectorXd& f_ext_eq,
                    std::vector<mech::QPState>& trial, Eigen::VectorXd* f_int_full,
                    const NewtonOptions& opt, AssemblyMode mode);

}  // namespace sentsim::fem
