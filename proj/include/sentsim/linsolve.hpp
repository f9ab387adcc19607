#pragma once

#include <memory>

#include <Eigen/Sparse>

#include "sentsim/common.hpp"

namespace sentsim::fem {

using SpMat = Eigen::SparseMatrix<double>;

/// Assembled linear system for one field.
struct SparseSystem {
  SpMat A;
  Eigen::VectorXd b;
  Eigen::VectorXd x;
};

/// Direct sparse solver with pattern reuse: symbolic analysis happens once,
/// numeric factorization on every solve. SPD systems use LDLT, general ones LU.
class LinearSolver {
 public:
  enum class Kind { spd, general };

  explicit LinearSolver(Kind kind = Kind::spd, double tol = 1e-10)
      : kind_(kind), tol_(tol) {}

  /// Factorizes A and solves into sys.x; verifies the relative residual
  /// (one step of iterative refinement before giving up). Returns the final
  /// relative residual.
  double solve(SparseSystem& sys);

 private:
  Kind kind_;
  double tol_;
  bool analyzed_ = false;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
};

}  // namespace sentsim::fem
