// SPDX-License-Identifier: Apache-2.0
//
// Evidence completeness audit: every document a task depends on exists in
// the index and can be reached by searching its own title.
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchforge/index.hpp"
#include "searchforge/synthesis.hpp"

namespace sf {

struct TaskCompleteness {
  std::string task_id;
  std::vector<DocumentId> evidence;
  std::vector<DocumentId> missing;
  std::vector<DocumentId> weakly_retrievable;
  bool complete() const { return missing.empty() && weakly_retrievable.empty(); }
};

struct CompletenessReport {
  std::vector<TaskCompleteness> tasks;
  std::size_t complete_tasks = 0;
  std::size_t missing_evidence_tasks = 0;
  std::size_t weak_tasks = 0;
  nlohmann::json to_json() const;
};

/// Evidence of a task = union of node evidence over its subgraph.
std::vector<DocumentId> task_evidence(const TaskSpec& t);

/// A document is retrievable when searching its title returns it in the
/// first `top_k` results.
bool title_retrievable(const IndexSnapshot& idx, const Document& d, int top_k);

CompletenessReport check_evidence_completeness(const std::vector<TaskSpec>& tasks, const IndexSnapshot& idx,
                                               int top_k = 50);

}  // namespace sf
