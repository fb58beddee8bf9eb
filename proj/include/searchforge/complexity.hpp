// SPDX-License-Identifier: Apache-2.0
//
// Difficulty report combining the topological axis (treewidth) and the
// distributional axis (source dispersion) for one reasoning graph.
#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "searchforge/graph.hpp"

namespace sf {

enum class TaskType { I, II, III };
std::string_view to_string(TaskType t);

/// k <= 1 linear, k == 2 cyclic/diamond, k >= 3 high-dimensional coupling.
TaskType classify_type(int k);

/// N * d^(k+1). Throws InvalidArgument on bad ranges and Overflow past int64.
std::int64_t reasoning_cost(std::int64_t hops, std::int64_t branching, int k);

struct ComplexityReport {
  std::optional<int> treewidth_exact;
  int treewidth_upper = 0;
  TaskType type_class = TaskType::I;
  std::optional<int> msd;
  std::optional<int> msd_upper;  // absent when some node has no evidence
  std::int64_t cost_estimate = 0;

  /// Exact treewidth when known, otherwise the upper bound.
  int effective_treewidth() const { return treewidth_exact.value_or(treewidth_upper); }

  friend bool operator==(const ComplexityReport&, const ComplexityReport&) = default;
};

struct ComplexityOptions {
  int node_limit = 20;
  int doc_universe_limit = 20;
  std::chrono::milliseconds treewidth_timeout{10'000};
  /// Candidates per hop for the cost estimate; no canonical value exists.
  std::int64_t branching = 2;
};

/// Hops for the cost estimate are the non-given nodes (at least one).
/// A cost that overflows saturates at INT64_MAX.
ComplexityReport compute_complexity(const ReasoningGraph& g, const ComplexityOptions& opts = {});

nlohmann::json complexity_to_json(const ComplexityReport& r);
ComplexityReport complexity_from_json(const nlohmann::json& j);

}  // namespace sf
