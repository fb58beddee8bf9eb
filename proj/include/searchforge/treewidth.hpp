// SPDX-License-Identifier: Apache-2.0
//
// Tree decompositions: certification of the three decomposition conditions,
// exact treewidth for small graphs and the min-fill upper bound.
#pragma once

#include <chrono>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "searchforge/graph.hpp"

namespace sf {

struct TreeDecomposition {
  /// bags[i] is the bag of decomposition node i.
  std::vector<std::set<NodeId>> bags;
  std::vector<std::pair<int, int>> tree_edges;

  int width() const;
};

enum class TdCondition {
  NotATree,          // tree edges do not form a tree over the bag indices
  VertexUncovered,   // condition 1: union of bags != V
  EdgeUncovered,     // condition 2: some edge lies in no bag
  SubtreeDisconnected,  // condition 3: bags holding a vertex are not connected
};
std::string_view to_string(TdCondition c);

struct TdViolation {
  TdCondition condition;
  std::string detail;
};

struct TdValidation {
  bool valid = false;
  int width = 0;
  std::vector<TdViolation> violations;
  bool violates(TdCondition c) const;
};

/// Throws ForeignVertex when a bag names a vertex that is not in `g`.
TdValidation validate_tree_decomposition(const UndirectedGraph& g, const TreeDecomposition& td);

/// Decomposition induced by eliminating vertices in `order` (indices into g).
TreeDecomposition decomposition_from_ordering(const UndirectedGraph& g, const std::vector<int>& order);

/// Width of the elimination ordering (max later-neighbour count in the filled graph).
int elimination_width(const UndirectedGraph& g, const std::vector<int>& order);

struct TreewidthResult {
  int width = 0;
  std::vector<int> ordering;
  TreeDecomposition decomposition;
};

struct ExactTreewidthOptions {
  int node_limit = 20;
  std::chrono::milliseconds timeout{10'000};
};

/// Subset dynamic programming over elimination orderings. Throws
/// GraphTooLarge above the node limit and Timeout past the deadline.
TreewidthResult exact_treewidth(const UndirectedGraph& g, const ExactTreewidthOptions& opts = {});
int treewidth_exact(const UndirectedGraph& g, int node_limit = 20);

/// Greedy min-fill elimination; ties go to the lowest NodeId.
TreewidthResult minfill_treewidth(const UndirectedGraph& g);
int treewidth_upper_minfill(const UndirectedGraph& g);

}  // namespace sf
