#pragma once

#include <vector>

#include "sentsim/common.hpp"

namespace sentsim::fem {

/// Maps (node, component) pairs onto global equation numbers. Constrained
/// dofs map to -1 and carry a prescribed value; alias groups (multi-point
/// equal-value constraints) share a single equation.
class DofMap {
 public:
  DofMap(std::size_t n_nodes, int n_comp);

  void set_dirichlet(int node, int comp, double value);
  /// Updates the prescribed value of an existing constraint (time-dependent
  /// Dirichlet data); allowed after finalize().
  void update_value(int node, int comp, double value);
  /// Ties (node, comp) of every listed node to one shared equation; returns
  /// the group id to be resolved after finalize() via group_eq().
  int add_alias_group(const std::vector<int>& nodes, int comp);

  void finalize();

  int n_comp() const { return ncomp_; }
  std::size_t n_dofs() const { return eq_.size(); }
  int n_eq() const { return n_eq_; }
  int eq(int node, int comp) const { return eq_[static_cast<std::size_t>(node) * ncomp_ + comp]; }
  bool constrained(int node, int comp) const { return eq(node, comp) < 0; }
  double prescribed(int node, int comp) const {
    return value_[static_cast<std::size_t>(node) * ncomp_ + comp];
  }
  int group_eq(int group) const { return group_eq_[group]; }

  /// Writes prescribed values into a full-length (n_dofs) vector.
  void apply_prescribed(double* full) const;

 private:
  int ncomp_;
  int n_eq_ = -1;
  std::vector<int> eq_;        // >=0 equation, -1 constrained, -2-group aliased (pre-finalize)
  std::vector<double> value_;
  std::vector<int> group_eq_;
  bool finalized_ = false;
};

}  // namespace sentsim::fem
