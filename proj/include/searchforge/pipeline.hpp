// SPDX-License-Identifier: Apache-2.0
//
// World -> ingest -> obfuscate -> noise -> index -> synthesize -> audit ->
// verify -> curate, on the generated fixture world.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchforge/agent.hpp"
#include "searchforge/completeness.hpp"
#include "searchforge/fixtures.hpp"
#include "searchforge/index.hpp"
#include "searchforge/synthesis.hpp"
#include "searchforge/verifier.hpp"

namespace sf {

struct DemoConfig {
  std::uint64_t seed = 42;
  WorldConfig world;
  double noise_ratio = 5.0;
  double confuser_fraction = 0.2;
  SynthesisConfig synthesis;
  PipelineConfig verifier;
  bool verify = true;
  int completeness_top_k = 50;
  double band_low = 0.0;
  double band_high = 1.0;
};

struct StageTiming {
  std::string stage;
  double seconds = 0;
};

struct DemoSummary {
  std::size_t ingested = 0;
  std::size_t obfuscated_urls = 0;
  std::size_t residual_source_urls = 0;
  std::size_t distractors = 0;
  std::size_t corpus_documents = 0;
  std::string index_hash;
  SynthesisStats synthesis;
  std::size_t tasks = 0;
  std::size_t gate_violations = 0;
  CompletenessReport completeness;
  std::size_t kept = 0;
  std::size_t filtered = 0;
  std::size_t curated = 0;
  std::vector<StageTiming> timings;

  /// No missing evidence and no gate violations.
  bool ok() const { return completeness.missing_evidence_tasks == 0 && gate_violations == 0; }
  nlohmann::json to_json() const;
};

struct DemoArtifacts {
  std::shared_ptr<const IndexSnapshot> index;
  std::vector<std::pair<std::string, std::string>> url_mapping;
  std::vector<TaskSpec> tasks;
  std::vector<VerificationReport> reports;
  std::vector<std::string> curated;
};

/// A failing stage aborts with an Error that keeps the original code and
/// names the stage ("stage <name>: ...").
DemoSummary end_to_end_demo(const DemoConfig& cfg, DemoArtifacts* artifacts = nullptr);

/// Emitted tasks whose complexity report has treewidth below k_min or
/// dispersion below msd_min.
std::size_t count_gate_violations(const std::vector<TaskSpec>& tasks, int k_min, int msd_min);

}  // namespace sf
