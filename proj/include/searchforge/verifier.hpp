// SPDX-License-Identifier: Apache-2.0
//
// Ordered task verification stages and pass-rate curation of RL queries.
#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchforge/corpus.hpp"
#include "searchforge/env_service.hpp"
#include "searchforge/synthesis.hpp"
#include "searchforge/trajectory.hpp"

namespace sf {

enum class StageKind { SolverPrefilter, Retrievability, Consistency, RolloutVerify, Uniqueness };
enum class Outcome { Pass, Fail, Skipped, PluginUnavailable };
enum class FinalDecision { Kept, Filtered };

std::string_view to_string(StageKind k);
std::string_view to_string(Outcome o);
std::string_view to_string(FinalDecision d);
StageKind parse_stage_kind(std::string_view s);
Outcome parse_outcome(std::string_view s);

struct VerifierStage {
  std::string name;
  StageKind kind = StageKind::Retrievability;
  std::map<std::string, std::string> params;

  int int_param(const std::string& key, int fallback) const;
};

// Plugins. All may throw; a throw is a plugin failure.

/// Tool-free answer attempt.
using SolverPlugin = std::function<std::string(const TaskSpec&)>;

struct EvidenceBundle {
  std::vector<std::string> triples;   // "source relation target" over labels
  std::vector<std::string> passages;  // evidence document bodies
};
struct ConsistencyVerdict {
  bool consistent = true;
  std::string note;
};
using ConsistencyPlugin = std::function<ConsistencyVerdict(const TaskSpec&, const EvidenceBundle&)>;

struct RolloutResult {
  std::string final_answer;
  /// The agent considers its own trajectory internally consistent.
  bool consistent = true;
  std::optional<Trajectory> trajectory;
};
using AgentPlugin = std::function<RolloutResult(const TaskSpec&, SearchBackend&, int rollout_index)>;

/// Does `answer` satisfy the task's recorded constraints?
using UniquenessJudge = std::function<bool(const TaskSpec&, const std::string& answer)>;

struct VerifierPlugins {
  SolverPlugin solver;
  ConsistencyPlugin checker;
  AgentPlugin agent;
  UniquenessJudge judge;
};

struct VerifierEnv {
  SearchBackend* search = nullptr;
  /// Source of evidence passages for the consistency stage; optional.
  const Corpus* corpus = nullptr;
};

struct StageRecord {
  std::string name;
  StageKind kind = StageKind::Retrievability;
  Outcome outcome = Outcome::Skipped;
  std::string detail;
};

struct VerificationReport {
  std::string task_id;
  std::vector<StageRecord> stages;
  std::optional<double> pass_rate;
  std::optional<int> rollouts;
  std::optional<std::set<std::string>> distinct_answers;
  FinalDecision final = FinalDecision::Kept;
  /// Not serialized; available to callers that collect rollouts.
  std::vector<RolloutResult> rollout_results;

  const StageRecord* stage(StageKind k) const;
};

nlohmann::json report_to_json(const VerificationReport& r);
VerificationReport report_from_json(const nlohmann::json& j);
void write_reports_jsonl(std::ostream& out, const std::vector<VerificationReport>& rs);
std::vector<VerificationReport> read_reports_jsonl(std::istream& in);

struct PipelineOptions {
  /// Missing or failing plugins filter the task instead of being skipped.
  bool strict = false;
  int uniqueness_threshold = 1;
};

/// cheap-to-expensive default order with top_k 50 and n 4.
std::vector<VerifierStage> default_stages();

/// Throws ConfigInvalid on duplicate stage kinds.
void validate_stages(const std::vector<VerifierStage>& stages);

struct PipelineConfig {
  std::vector<VerifierStage> stages = default_stages();
  PipelineOptions options;
};
/// {"strict": bool, "uniqueness_threshold": int, "stages": [{"name", "kind", "params"}]}
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json pipeline_config_to_json(const PipelineConfig& c);

// Individual stages.
Outcome stage_solver_prefilter(const TaskSpec& t, const SolverPlugin& solver, std::string* detail = nullptr);
Outcome stage_retrievability(const TaskSpec& t, SearchBackend& search, int top_k = 50, std::string* detail = nullptr);
Outcome stage_consistency(const TaskSpec& t, const EvidenceBundle& bundle, const ConsistencyPlugin& checker,
                          std::string* detail = nullptr);

struct RolloutOutcome {
  Outcome outcome = Outcome::Fail;
  double pass_rate = 0;
  int matches = 0;
  int n = 0;
  std::set<std::string> answers;
  std::vector<RolloutResult> results;
};
/// Throws InvalidArgument for n < 1. A throwing rollout counts as a miss with
/// no answer.
RolloutOutcome stage_rollout_verify(const TaskSpec& t, const AgentPlugin& agent, SearchBackend& search, int n);
Outcome stage_uniqueness(const TaskSpec& t, const std::vector<RolloutResult>& rollouts, const UniquenessJudge& judge,
                         int threshold = 1, std::string* detail = nullptr);

EvidenceBundle build_evidence_bundle(const TaskSpec& t, const Corpus* corpus);

/// Throws ConfigInvalid (duplicate kinds), InvalidArgument (no search
/// backend while a stage needs one), EnvironmentUnreachable.
VerificationReport run_pipeline(const TaskSpec& task, const std::vector<VerifierStage>& stages, const VerifierEnv& env,
                                const VerifierPlugins& plugins = {}, const PipelineOptions& options = {});

/// Task ids with low < pass_rate < high. Throws MissingPassRate.
std::vector<std::string> curate_rl_queries(const std::vector<VerificationReport>& reports, double low = 0.0,
                                           double high = 1.0);

}  // namespace sf
