#pragma once

#include <cstddef>
#include <vector>

#include "recwalk/sparse.hpp"

namespace recwalk {

/// Connected components of the user-item bipartite graph. Users occupy
/// nodes 0..U-1 and items U..U+I-1.
struct ComponentLabeling {
  std::vector<std::size_t> labels;  // per node, components numbered by first node
  std::vector<std::size_t> sizes;   // per component

  std::size_t count() const { return sizes.size(); }
  bool connected() const { return sizes.size() == 1; }
  std::size_t largest_component() const;
};

ComponentLabeling check_connectivity(const SparseMatrix& r);

/// Simple random walk on the bipartite graph: order U+I, each user row
/// spreads mass uniformly over its items and each item row over its users.
StochasticMatrix build_h(const SparseMatrix& r);

/// Scales W by its largest row sum and moves each row's residual onto the
/// diagonal. Off-diagonal order is preserved; empty rows become self-loops.
StochasticMatrix stochasticity_adjust(const SparseMatrix& w);

/// Transition matrix of the walk, P = alpha*H + (1-alpha)*blockdiag(I_U, M_I),
/// with its components.
struct RecWalkModel {
  StochasticMatrix p;
  StochasticMatrix h;
  StochasticMatrix m_items;
  double alpha = 0.0;
  std::size_t num_users = 0;
  std::size_t num_items = 0;

  std::size_t order() const { return num_users + num_items; }
  std::size_t item_node(std::size_t item) const { return num_users + item; }
};

/// Throws AlphaOutOfRange, EmptyModel or DisconnectedGraph.
RecWalkModel build_p(const SparseMatrix& r, const SparseMatrix& w, double alpha);

/// Sign vector +1 on user nodes and -1 on item nodes.
DenseVector structural_vector(std::size_t num_users, std::size_t num_items);

}  // namespace recwalk
