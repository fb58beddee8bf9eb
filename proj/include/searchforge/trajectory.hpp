// SPDX-License-Identifier: Apache-2.0
//
// ReAct trajectories: data model, token estimates, discard-all context
// resets, the <tool_call> text record, JSONL, and the SFT post-filter.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sf {

struct ToolAction {
  std::string tool_name;
  nlohmann::ordered_json arguments = nlohmann::ordered_json::object();
  /// Payload of <code></code> for PythonInterpreter calls.
  std::string code;
  friend bool operator==(const ToolAction&, const ToolAction&) = default;
};

struct Step {
  std::string thought;
  ToolAction action;
  std::string observation;
  bool failed = false;
  friend bool operator==(const Step&, const Step&) = default;
};

struct ResetRecord {
  std::size_t at_step = 0;  // steps taken before the reset
  std::int64_t tokens_before = 0;
  friend bool operator==(const ResetRecord&, const ResetRecord&) = default;
};

struct Trajectory {
  std::string id;
  std::string question;
  /// Set on the first reset; kept alongside the question afterwards.
  std::string minimal_spec;
  /// Steps dropped from context by resets, in order.
  std::vector<Step> archived;
  /// Steps currently in context.
  std::vector<Step> steps;
  std::optional<std::string> final_answer;
  std::vector<ResetRecord> resets;
  std::int64_t token_estimate = 0;

  bool finalized() const { return final_answer.has_value(); }
  std::size_t step_count() const { return archived.size() + steps.size(); }
  std::vector<Step> all_steps() const;
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

class ToolRegistry {
 public:
  /// search, visit, PythonInterpreter, google_scholar, google_maps.
  static ToolRegistry defaults();
  void add(std::string name) { names_.insert(std::move(name)); }
  bool contains(const std::string& name) const { return names_.count(name) > 0; }
  const std::set<std::string>& names() const { return names_; }

 private:
  std::set<std::string> names_;
};

struct ContextPolicy {
  std::int64_t window_budget = 131072;
  double threshold_fraction = 0.9;
  /// {question} is substituted.
  std::string minimal_spec = "Context was reset. Keep working on the original question and finish with a final answer.";

  /// floor(threshold_fraction * window_budget). Throws ConfigInvalid when
  /// the fraction is outside (0, 1] or the budget is not positive.
  std::int64_t threshold() const;
};

/// ceil(chars / 4).
std::int64_t estimate_tokens(std::size_t chars);
/// Estimate of what is in context: question, minimal spec, in-context steps.
std::int64_t estimate_tokens(const Trajectory& t);
/// Estimate over the whole transcript including archived steps.
std::int64_t total_tokens(const Trajectory& t);

/// The <tool_call>...</tool_call> block for one action.
std::string render_tool_call(const ToolAction& a);

Trajectory make_trajectory(std::string id, std::string question);

/// Throws AlreadyFinalized, UnknownTool, MalformedRecord (arguments not an
/// object).
void append_step(Trajectory& t, Step s, const ToolRegistry& tools = ToolRegistry::defaults());
/// Throws AlreadyFinalized.
void finalize(Trajectory& t, std::string answer);

/// Clears in-context steps when the estimate is strictly above the policy
/// threshold. Returns true if a reset happened. Throws
/// QuestionAloneExceedsBudget when the retained content is still above it.
bool apply_discard_all(Trajectory& t, const ContextPolicy& p);

/// Evaluation-time alternative to discard-all, never combined with it. When
/// the estimate is strictly above the threshold, the latest rounds leave the
/// context (into `archived`) until it fits again; the caller must then ask for
/// a final answer. Returns the number of rounds rolled back. Throws
/// QuestionAloneExceedsBudget when no in-context step is left to drop.
std::size_t apply_rollback_force_answer(Trajectory& t, const ContextPolicy& p);

std::string serialize(const Trajectory& t);
/// Throws MalformedRecord.
Trajectory deserialize(const std::string& record);

nlohmann::json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);
void write_trajectories_jsonl(std::ostream& out, const std::vector<Trajectory>& ts);
/// Throws MalformedRecord with the line number.
std::vector<Trajectory> read_trajectories_jsonl(std::istream& in);

double failed_fraction(const Trajectory& t);

struct SftConfig {
  std::int64_t max_tokens = 131072;
  double max_failed_fraction = 0.3;
};

struct SftStats {
  std::size_t input = 0;
  std::size_t wrong_answer = 0;
  std::size_t over_length = 0;
  std::size_t too_many_failures = 0;
  std::size_t duplicates = 0;
  std::size_t kept = 0;
};

/// Keeps correct, in-budget, mostly-successful trajectories, one per
/// question: fewest steps, then smallest id. `gold` maps question text to
/// answer; trajectories without a gold answer count as wrong.
std::vector<Trajectory> sft_filter(const std::vector<Trajectory>& ts, const std::map<std::string, std::string>& gold,
                                   const SftConfig& cfg = {}, SftStats* stats = nullptr);

}  // namespace sf
