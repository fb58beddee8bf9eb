// SPDX-License-Identifier: Apache-2.0
#include "searchforge/completeness.hpp"

#include <set>
#include <unordered_map>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

std::vector<DocumentId> task_evidence(const TaskSpec& t) {
  std::set<DocumentId> all;
  for (const auto& n : t.subgraph.nodes()) all.insert(n.evidence.begin(), n.evidence.end());
  return {all.begin(), all.end()};
}

bool title_retrievable(const IndexSnapshot& idx, const Document& d, int top_k) {
  if (tokenize(d.title).empty()) return false;
  for (const auto& r : idx.search_one(d.title, top_k))
    if (r.doc_id == d.id) return true;
  return false;
}

CompletenessReport check_evidence_completeness(const std::vector<TaskSpec>& tasks, const IndexSnapshot& idx,
                                               int top_k) {
  CompletenessReport report;
  std::unordered_map<DocumentId, bool> reachable;  // memo across tasks
  for (const auto& t : tasks) {
    TaskCompleteness tc;
    tc.task_id = t.id;
    tc.evidence = task_evidence(t);
    for (const auto& id : tc.evidence) {
      const Document* d = idx.corpus().find_by_id(id);
      if (!d) {
        tc.missing.push_back(id);
        continue;
      }
      auto it = reachable.find(id);
      if (it == reachable.end()) it = reachable.emplace(id, title_retrievable(idx, *d, top_k)).first;
      if (!it->second) tc.weakly_retrievable.push_back(id);
    }
    if (!tc.missing.empty()) ++report.missing_evidence_tasks;
    if (!tc.weakly_retrievable.empty()) ++report.weak_tasks;
    if (tc.complete()) ++report.complete_tasks;
    report.tasks.push_back(std::move(tc));
  }
  return report;
}

nlohmann::json CompletenessReport::to_json() const {
  nlohmann::json j;
  j["tasks"] = tasks.size();
  j["complete"] = complete_tasks;
  j["missing_evidence"] = missing_evidence_tasks;
  j["weakly_retrievable"] = weak_tasks;
  nlohmann::json flagged = nlohmann::json::array();
  for (const auto& t : tasks) {
    if (t.complete()) continue;
    flagged.push_back({{"task_id", t.task_id}, {"missing", t.missing}, {"weakly_retrievable", t.weakly_retrievable}});
  }
  j["flagged"] = flagged;
  return j;
}

}  // namespace sf
