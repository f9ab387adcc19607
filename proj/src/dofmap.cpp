#include "sentsim/dofmap.hpp"

namespace sentsim::fem {

DofMap::DofMap(std::size_t n_nodes, int n_comp)
    : ncomp_(n_comp), eq_(n_nodes * n_comp, 0), value_(n_nodes * n_comp, 0.0) {}

void DofMap::set_dirichlet(int node, int comp, double value) {
  if (finalized_) throw StateError("DofMap: set_dirichlet after finalize");
  auto& e = eq_[static_cast<std::size_t>(node) * ncomp_ + comp];
  if (e <= -2) throw ConfigError("DofMap: dof is already in an alias group");
  e = -1;
  value_[static_cast<std::size_t>(node) * ncomp_ + comp] = value;
}

void DofMap::update_value(int node, int comp, double value) {
  const std::size_t d = static_cast<std::size_t>(node) * ncomp_ + comp;
  if (eq_[d] != -1) throw StateError("DofMap: update_value on an unconstrained dof");
  value_[d] = value;
}

int DofMap::add_alias_group(const std::vector<int>& nodes, int comp) {
  if (finalized_) throw StateError("DofMap: add_alias_group after finalize");
  const int gid = static_cast<int>(group_eq_.size());
  group_eq_.push_back(-1);
  for (int n : nodes) {
    auto& e = eq_[static_cast<std::size_t>(n) * ncomp_ + comp];
    if (e != 0) throw ConfigError("DofMap: aliased dof is constrained or already aliased");
    e = -2 - gid;
  }
  return gid;
}

void DofMap::finalize() {
  if (finalized_) return;
  int next = 0;
  for (auto& e : eq_) {
    if (e == 0) e = next++;
  }
  // One shared equation per alias group.
  for (std::size_t g = 0; g < group_eq_.size(); ++g) group_eq_[g] = next++;
  for (auto& e : eq_) {
    if (e <= -2) e = group_eq_[static_cast<std::size_t>(-2 - e)];
  }
  n_eq_ = next;
  finalized_ = true;
}

void DofMap::apply_prescribed(double* full) const {
  for (std::size_t d = 0; d < eq_.size(); ++d)
    if (eq_[d] == -1) full[d] = value_[d];
}

}  // namespace sentsim::fem
