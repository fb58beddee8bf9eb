// SPDX-License-Identifier: Apache-2.0
//
// Task synthesis: topology enrichment, one-graph-multi-task subgraph sampling,
// answer selection by structural role, template rendering of the question,
// tool-constraint injection, and the treewidth/dispersion acceptance gate.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchforge/complexity.hpp"
#include "searchforge/graph.hpp"

namespace sf {

enum class AnswerRole { DeepLeaf, Hub };
std::string_view to_string(AnswerRole r);
AnswerRole parse_answer_role(std::string_view s);

struct InjectedConstraint {
  NodeId node;
  std::string rule_name;
  std::string rendered_clause;
  friend bool operator==(const InjectedConstraint&, const InjectedConstraint&) = default;
};

struct Provenance {
  std::string source_graph;
  int sample_index = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TaskSpec {
  std::string id;
  ReasoningGraph subgraph;
  NodeId answer_node;
  std::string answer_text;
  std::string question_text;
  std::vector<InjectedConstraint> injected_constraints;
  bool injection_noop = false;
  std::optional<ComplexityReport> complexity;
  Provenance provenance;
  AnswerRole answer_role = AnswerRole::DeepLeaf;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

nlohmann::json task_to_json(const TaskSpec& t);
TaskSpec task_from_json(const nlohmann::json& j);

/// Normalized answer text occurs inside the normalized question.
bool leaks_answer(std::string_view question, std::string_view answer);

// ---------------------------------------------------------------------------
// Topology enrichment

struct EnrichmentRules {
  /// Connect nodes that share at least one evidence document.
  bool shared_evidence = true;
  /// Connect nodes whose value for any of these attribute keys is equal.
  std::vector<std::string> equal_attributes;
};

/// LLM graph agent stand-in: proposes extra edges for the graph.
using GraphAgentPlugin = std::function<std::vector<GraphEdge>(const ReasoningGraph&)>;

struct RejectedEdge {
  GraphEdge edge;
  std::string reason;
};

struct EnrichmentResult {
  ReasoningGraph graph;
  std::vector<GraphEdge> added;
  std::vector<RejectedEdge> rejected;
  std::optional<std::string> plugin_error;  // PluginFailure surfaced here
};

/// Never removes nodes or edges. Rule edges are oriented along the
/// topological order so the directed skeleton stays acyclic.
EnrichmentResult enrich_topology(const ReasoningGraph& g, const EnrichmentRules& rules,
                                 const GraphAgentPlugin& plugin = {});

// ---------------------------------------------------------------------------
// Sampling and answer selection

/// Up to `count` connected induced subgraphs with pairwise distinct node sets
/// whose sizes fall in [size_min, size_max]. Deterministic in `seed`.
std::vector<ReasoningGraph> sample_subgraphs(const ReasoningGraph& g, int count, int size_min,
                                             int size_max, std::uint64_t seed);

struct AnswerSelection {
  NodeId node;
  ReasoningGraph graph;  // selected node has role Answer, previous answers demoted
};

AnswerSelection select_answer_node(const ReasoningGraph& g, AnswerRole role);

// ---------------------------------------------------------------------------
// Question rendering

struct TemplateLibrary {
  /// relation -> clause with {source} and {target} slots
  std::map<std::string, std::string> templates;
  std::optional<std::string> fallback;  // used for unknown relations when set
  std::string answer_placeholder = "X";
  std::string prefix = "Identify {answer}: ";
  std::string joiner = "; ";
  std::string suffix = ".";

  static TemplateLibrary defaults();
  static TemplateLibrary from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

using QuestionGenerator = std::function<std::string(const ReasoningGraph&, const NodeId&)>;

/// Throws MissingTemplate or AnswerLeakage. A throwing generator falls back to
/// the template path.
std::string render_question(const ReasoningGraph& g, const NodeId& answer, const TemplateLibrary& lib,
                            const QuestionGenerator& plugin = {});

// ---------------------------------------------------------------------------
// Tool-constraint injection

enum class InjectionKind { MapDistance, CitationInterval, AttributeClause };

struct InjectionRule {
  std::string name;
  InjectionKind kind = InjectionKind::AttributeClause;
  std::string clause_template;
  std::vector<std::string> required_attributes;  // AttributeClause slots
  std::string lat_key = "lat";
  std::string lon_key = "lon";
  std::string citations_key = "citations";
  double speed_kmh = 80.0;
};

struct InjectionRuleSet {
  std::vector<InjectionRule> rules;
  static InjectionRuleSet defaults();
  static InjectionRuleSet from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Great-circle distance (km) and initial compass bearing (degrees).
double haversine_km(double lat1, double lon1, double lat2, double lon2);
double bearing_deg(double lat1, double lon1, double lat2, double lon2);
std::string compass_direction(double bearing);
/// "two hours'" style duration phrase, rounded to whole hours (minimum one).
std::string drive_duration_phrase(double hours);
/// Two significant digits: 1234 -> 1200.
long long approximate_count(double value);

TaskSpec inject_tool_constraints(const TaskSpec& task, const InjectionRuleSet& rules);

// ---------------------------------------------------------------------------
// Gate and driver

struct GateDecision {
  bool accepted = false;
  bool used_treewidth_upper = false;
  bool used_msd_upper = false;
};

/// Throws MissingComplexityReport.
GateDecision dual_constrained_accept(const TaskSpec& task, int k_min, int k_max, int msd_min);

struct SynthesisConfig {
  std::uint64_t seed = 0;
  int k_min = 2;
  int k_max = 3;
  int msd_min = 2;
  int subgraphs_per_graph = 10;
  int size_min = 4;
  int size_max = 8;
  std::vector<AnswerRole> roles{AnswerRole::DeepLeaf, AnswerRole::Hub};
  /// Reject candidates whose treewidth or dispersion is only bounded.
  bool require_exact = true;
  EnrichmentRules enrichment;
  TemplateLibrary templates = TemplateLibrary::defaults();
  InjectionRuleSet injection = InjectionRuleSet::defaults();
  ComplexityOptions complexity;
};

struct SynthesisPlugins {
  GraphAgentPlugin graph_agent;
  QuestionGenerator question_generator;
};

struct SynthesisStats {
  std::size_t graphs = 0;
  std::size_t subgraphs = 0;
  std::size_t candidates = 0;
  std::size_t no_answer = 0;
  std::size_t gate_rejected = 0;
  std::size_t render_rejected = 0;
  std::size_t invalid = 0;
  std::size_t duplicates = 0;
  std::size_t emitted = 0;
  std::size_t enrichment_plugin_errors = 0;
};

std::vector<TaskSpec> synthesize(const std::vector<ReasoningGraph>& graphs, const SynthesisConfig& cfg,
                                 SynthesisStats* stats = nullptr, const SynthesisPlugins& plugins = {});

}  // namespace sf
