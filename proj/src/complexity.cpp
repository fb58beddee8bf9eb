// SPDX-License-Identifier: Apache-2.0
#include "searchforge/complexity.hpp"

#include <limits>

#include "searchforge/dispersion.hpp"
#include "searchforge/error.hpp"
#include "searchforge/treewidth.hpp"

namespace sf {

std::string_view to_string(TaskType t) {
  switch (t) {
    case TaskType::I: return "I";
    case TaskType::II: return "II";
    case TaskType::III: return "III";
  }
  return "I";
}

TaskType classify_type(int k) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "treewidth must be non-negative");
  if (k <= 1) return TaskType::I;
  if (k == 2) return TaskType::II;
  return TaskType::III;
}

std::int64_t reasoning_cost(std::int64_t hops, std::int64_t branching, int k) {
  if (hops < 1 || branching < 1 || k < 0)
    throw Error(ErrorCode::InvalidArgument, "reasoning_cost needs N >= 1, d >= 1, k >= 0");
  std::int64_t acc = hops;
  for (int i = 0; i < k + 1; ++i) {
    if (__builtin_mul_overflow(acc, branching, &acc))
      throw Error(ErrorCode::Overflow, "N * d^(k+1) exceeds int64");
  }
  return acc;
}

ComplexityReport compute_complexity(const ReasoningGraph& g, const ComplexityOptions& opts) {
  ComplexityReport r;
  const UndirectedGraph view = constraint_view(g);
  r.treewidth_upper = treewidth_upper_minfill(view);
  if (view.size() <= opts.node_limit) {
    try {
      r.treewidth_exact = exact_treewidth(view, {opts.node_limit, opts.treewidth_timeout}).width;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Timeout) throw;
    }
  }
  r.type_class = classify_type(r.effective_treewidth());

  try {
    r.msd_upper = msd_greedy(g);
    r.msd = msd_exact(g, opts.doc_universe_limit);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Uncoverable && e.code() != ErrorCode::UniverseTooLarge) throw;
  }

  std::int64_t hops = 0;
  for (const auto& n : g.nodes()) hops += n.role == NodeRole::Given ? 0 : 1;
  try {
    r.cost_estimate = reasoning_cost(std::max<std::int64_t>(hops, 1), opts.branching, r.effective_treewidth());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Overflow) throw;
    r.cost_estimate = std::numeric_limits<std::int64_t>::max();
  }
  return r;
}

nlohmann::json complexity_to_json(const ComplexityReport& r) {
  nlohmann::json j;
  j["treewidth_exact"] = r.treewidth_exact ? nlohmann::json(*r.treewidth_exact) : nlohmann::json();
  j["treewidth_upper"] = r.treewidth_upper;
  j["type_class"] = to_string(r.type_class);
  j["msd"] = r.msd ? nlohmann::json(*r.msd) : nlohmann::json();
  j["msd_upper"] = r.msd_upper ? nlohmann::json(*r.msd_upper) : nlohmann::json();
  j["cost_estimate"] = r.cost_estimate;
  return j;
}

ComplexityReport complexity_from_json(const nlohmann::json& j) {
  ComplexityReport r;
  if (j.contains("treewidth_exact") && !j["treewidth_exact"].is_null()) r.treewidth_exact = j["treewidth_exact"].get<int>();
  r.treewidth_upper = j.at("treewidth_upper").get<int>();
  std::string t = j.at("type_class").get<std::string>();
  r.type_class = t == "III" ? TaskType::III : t == "II" ? TaskType::II : TaskType::I;
  if (j.contains("msd") && !j["msd"].is_null()) r.msd = j["msd"].get<int>();
  if (j.contains("msd_upper") && !j["msd_upper"].is_null()) r.msd_upper = j["msd_upper"].get<int>();
  r.cost_estimate = j.at("cost_estimate").get<std::int64_t>();
  return r;
}

}  // namespace sf
