// SPDX-License-Identifier: Apache-2.0
//
// Deterministic retrieval agent used as the default rollout plugin: search
// the question, visit candidate pages, answer with the page that states the
// most question clauses about the unknown. Rollouts differ by a seeded
// exploration choice.
#pragma once

#include <cstdint>

#include "searchforge/verifier.hpp"

namespace sf {

struct BaselineAgentConfig {
  std::uint64_t seed = 0;
  int top_k = 30;
  int max_candidates = 5;
  /// Probability of answering with the best-covering candidate; otherwise
  /// the agent explores the next one down.
  double greedy_probability = 0.6;
};

RolloutResult baseline_rollout(const TaskSpec& t, SearchBackend& search, int rollout_index,
                               const BaselineAgentConfig& cfg = {});
AgentPlugin make_baseline_agent(BaselineAgentConfig cfg = {});

/// Rule-based consistency checker: every labelled endpoint of every triple
/// is mentioned in at least one evidence passage.
ConsistencyPlugin make_evidence_checker();

}  // namespace sf
