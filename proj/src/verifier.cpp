// SPDX-License-Identifier: Apache-2.0
#include "searchforge/verifier.hpp"

#include <istream>
#include <ostream>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

std::string_view to_string(StageKind k) {
  switch (k) {
    case StageKind::SolverPrefilter: return "solver_prefilter";
    case StageKind::Retrievability: return "retrievability";
    case StageKind::Consistency: return "consistency";
    case StageKind::RolloutVerify: return "rollout_verify";
    case StageKind::Uniqueness: return "uniqueness";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::Skipped: return "skipped";
    case Outcome::PluginUnavailable: return "plugin_unavailable";
  }
  return "?";
}

std::string_view to_string(FinalDecision d) { return d == FinalDecision::Kept ? "kept" : "filtered"; }

StageKind parse_stage_kind(std::string_view s) {
  for (auto k : {StageKind::SolverPrefilter, StageKind::Retrievability, StageKind::Consistency, StageKind::RolloutVerify,
                 StageKind::Uniqueness})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ConfigInvalid, "unknown stage kind '" + std::string(s) + "'");
}

Outcome parse_outcome(std::string_view s) {
  for (auto o : {Outcome::Pass, Outcome::Fail, Outcome::Skipped, Outcome::PluginUnavailable})
    if (to_string(o) == s) return o;
  throw Error(ErrorCode::MalformedRecord, "unknown outcome '" + std::string(s) + "'");
}

int VerifierStage::int_param(const std::string& key, int fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    std::size_t used = 0;
    int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigInvalid, "stage '" + name + "' param " + key + " is not an integer");
  }
}

const StageRecord* VerificationReport::stage(StageKind k) const {
  for (const auto& s : stages)
    if (s.kind == k) return &s;
  return nullptr;
}

std::vector<VerifierStage> default_stages() {
  return {{"solver_prefilter", StageKind::SolverPrefilter, {}},
          {"retrievability", StageKind::Retrievability, {{"top_k", "50"}}},
          {"consistency", StageKind::Consistency, {}},
          {"rollout_verify", StageKind::RolloutVerify, {{"n", "4"}}},
          {"uniqueness", StageKind::Uniqueness, {}}};
}

void validate_stages(const std::vector<VerifierStage>& stages) {
  std::set<StageKind> seen;
  for (const auto& s : stages)
    if (!seen.insert(s.kind).second)
      throw Error(ErrorCode::ConfigInvalid, "stage kind " + std::string(to_string(s.kind)) + " appears twice");
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    c.options.strict = j.value("strict", false);
    c.options.uniqueness_threshold = j.value("uniqueness_threshold", 1);
    if (j.contains("stages")) {
      c.stages.clear();
      for (const auto& js : j.at("stages")) {
        VerifierStage s;
        s.kind = parse_stage_kind(js.at("kind").get<std::string>());
        s.name = js.value("name", std::string(to_string(s.kind)));
        const nlohmann::json params = js.value("params", nlohmann::json::object());
        for (const auto& [k, v] : params.items())
          s.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
        c.stages.push_back(std::move(s));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  validate_stages(c.stages);
  return c;
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : c.stages) stages.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"params", s.params}});
  return {{"strict", c.options.strict}, {"uniqueness_threshold", c.options.uniqueness_threshold}, {"stages", stages}};
}

// ---------------------------------------------------------------------------
// Stages

Outcome stage_solver_prefilter(const TaskSpec& t, const SolverPlugin& solver, std::string* detail) {
  if (!solver) return Outcome::PluginUnavailable;
  std::string answer = solver(t);
  bool solved = answers_match(answer, t.answer_text);
  if (detail) *detail = solved ? "solved without tools" : "not solved without tools";
  return solved ? Outcome::Fail : Outcome::Pass;
}

Outcome stage_retrievability(const TaskSpec& t, SearchBackend& search, int top_k, std::string* detail) {
  auto results = search.search({t.question_text}, top_k);
  const auto& list = results.at(0);
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (normalized_contains(list[i].snippet, t.answer_text)) {
      if (detail) *detail = "answer in snippet at rank " + std::to_string(i + 1);
      return Outcome::Pass;
    }
  }
  if (detail) *detail = "answer absent from top " + std::to_string(top_k) + " snippets";
  return Outcome::Fail;
}

Outcome stage_consistency(const TaskSpec& t, const EvidenceBundle& bundle, const ConsistencyPlugin& checker,
                          std::string* detail) {
  if (!checker) return Outcome::PluginUnavailable;
  ConsistencyVerdict v = checker(t, bundle);
  if (detail) *detail = v.note;
  return v.consistent ? Outcome::Pass : Outcome::Fail;
}

RolloutOutcome stage_rollout_verify(const TaskSpec& t, const AgentPlugin& agent, SearchBackend& search, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "rollout count must be >= 1");
  RolloutOutcome ro;
  ro.n = n;
  for (int i = 0; i < n; ++i) {
    RolloutResult r;
    try {
      r = agent(t, search, i);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EnvironmentUnreachable) throw;
      r.consistent = false;
    } catch (const std::exception&) {
      r.consistent = false;
    }
    if (!trim(r.final_answer).empty()) {
      ro.answers.insert(normalize_answer(r.final_answer));
      if (answers_match(r.final_answer, t.answer_text)) ++ro.matches;
    }
    ro.results.push_back(std::move(r));
  }
  ro.pass_rate = static_cast<double>(ro.matches) / static_cast<double>(n);
  ro.outcome = ro.matches > 0 ? Outcome::Pass : Outcome::Fail;
  return ro;
}

Outcome stage_uniqueness(const TaskSpec& t, const std::vector<RolloutResult>& rollouts, const UniquenessJudge& judge,
                         int threshold, std::string* detail) {
  std::set<std::string> candidates;
  std::size_t answered = 0;
  for (const auto& r : rollouts) {
    if (!r.consistent || trim(r.final_answer).empty()) continue;
    ++answered;
    if (judge && !judge(t, r.final_answer)) continue;
    candidates.insert(normalize_answer(r.final_answer));
  }
  if (answered < 2) {
    if (detail) *detail = "fewer than two consistent rollouts";
    return Outcome::Pass;
  }
  const std::size_t limit = judge ? 1 : static_cast<std::size_t>(std::max(threshold, 1));
  if (detail) *detail = std::to_string(candidates.size()) + " distinct plausible answers";
  return candidates.size() > limit ? Outcome::Fail : Outcome::Pass;
}

EvidenceBundle build_evidence_bundle(const TaskSpec& t, const Corpus* corpus) {
  EvidenceBundle b;
  const auto& g = t.subgraph;
  for (const auto& e : g.edges()) {
    auto label = [&](const NodeId& id) { return id == t.answer_node ? std::string("?") : g.node(id).label; };
    b.triples.push_back(label(e.source) + " " + e.relation + " " + label(e.target));
  }
  if (corpus) {
    std::set<DocumentId> ids;
    for (const auto& n : g.nodes()) ids.insert(n.evidence.begin(), n.evidence.end());
    for (const auto& id : ids)
      if (const Document* d = corpus->find_by_id(id)) b.passages.push_back(d->body);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Driver

VerificationReport run_pipeline(const TaskSpec& task, const std::vector<VerifierStage>& stages, const VerifierEnv& env,
                                const VerifierPlugins& plugins, const PipelineOptions& options) {
  validate_stages(stages);
  VerificationReport report;
  report.task_id = task.id;
  bool stopped = false;
  bool rollout_ran = false;
  for (const auto& stage : stages) {
    StageRecord rec{stage.name, stage.kind, Outcome::Skipped, ""};
    if (stopped) {
      rec.detail = "not run after earlier failure";
      report.stages.push_back(std::move(rec));
      continue;
    }
    auto needs_search = [&] {
      if (!env.search) throw Error(ErrorCode::InvalidArgument, "stage " + stage.name + " needs a search backend");
      return env.search;
    };
    try {
      switch (stage.kind) {
        case StageKind::SolverPrefilter:
          rec.outcome = stage_solver_prefilter(task, plugins.solver, &rec.detail);
          break;
        case StageKind::Retrievability:
          rec.outcome = stage_retrievability(task, *needs_search(), stage.int_param("top_k", 50), &rec.detail);
          break;
        case StageKind::Consistency:
          rec.outcome = plugins.checker ? stage_consistency(task, build_evidence_bundle(task, env.corpus), plugins.checker,
                                                            &rec.detail)
                                        : Outcome::PluginUnavailable;
          break;
        case StageKind::RolloutVerify: {
          if (!plugins.agent) {
            rec.outcome = Outcome::PluginUnavailable;
            break;
          }
          auto ro = stage_rollout_verify(task, plugins.agent, *needs_search(), stage.int_param("n", 4));
          rec.outcome = ro.outcome;
          rec.detail = std::to_string(ro.matches) + "/" + std::to_string(ro.n) + " rollouts matched";
          report.pass_rate = ro.pass_rate;
          report.rollouts = ro.n;
          report.distinct_answers = ro.answers;
          report.rollout_results = std::move(ro.results);
          rollout_ran = true;
          break;
        }
        case StageKind::Uniqueness:
          if (!rollout_ran) {
            rec.detail = "no rollout stage before uniqueness";
            break;
          }
          rec.outcome = stage_uniqueness(task, report.rollout_results, plugins.judge,
                                         stage.int_param("threshold", options.uniqueness_threshold), &rec.detail);
          break;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EnvironmentUnreachable || e.code() == ErrorCode::InvalidArgument ||
          e.code() == ErrorCode::ConfigInvalid)
        throw;
      rec.outcome = options.strict ? Outcome::Fail : Outcome::Skipped;
      rec.detail = std::string("plugin failure: ") + e.what();
    } catch (const std::exception& e) {
      rec.outcome = options.strict ? Outcome::Fail : Outcome::Skipped;
      rec.detail = std::string("plugin failure: ") + e.what();
    }
    if (rec.outcome == Outcome::PluginUnavailable && rec.detail.empty()) rec.detail = "plugin not configured";
    if (rec.outcome == Outcome::Fail || (options.strict && rec.outcome == Outcome::PluginUnavailable)) {
      stopped = true;
      report.final = FinalDecision::Filtered;
    }
    report.stages.push_back(std::move(rec));
  }
  return report;
}

std::vector<std::string> curate_rl_queries(const std::vector<VerificationReport>& reports, double low, double high) {
  std::vector<std::string> out;
  for (const auto& r : reports) {
    if (!r.pass_rate) throw Error(ErrorCode::MissingPassRate, "report for '" + r.task_id + "' has no pass rate");
    if (*r.pass_rate > low && *r.pass_rate < high) out.push_back(r.task_id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL

nlohmann::json report_to_json(const VerificationReport& r) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"outcome", to_string(s.outcome)}, {"detail", s.detail}});
  nlohmann::json j = {{"task_id", r.task_id}, {"stages", stages}, {"final", to_string(r.final)}};
  j["pass_rate"] = r.pass_rate ? nlohmann::json(*r.pass_rate) : nlohmann::json();
  j["rollouts"] = r.rollouts ? nlohmann::json(*r.rollouts) : nlohmann::json();
  j["distinct_answers"] = r.distinct_answers ? nlohmann::json(*r.distinct_answers) : nlohmann::json();
  return j;
}

VerificationReport report_from_json(const nlohmann::json& j) {
  try {
    VerificationReport r;
    r.task_id = j.at("task_id").get<std::string>();
    for (const auto& js : j.at("stages")) {
      StageRecord s;
      s.name = js.at("name").get<std::string>();
      s.kind = parse_stage_kind(js.at("kind").get<std::string>());
      s.outcome = parse_outcome(js.at("outcome").get<std::string>());
      s.detail = js.value("detail", "");
      r.stages.push_back(std::move(s));
    }
    r.final = j.at("final").get<std::string>() == "kept" ? FinalDecision::Kept : FinalDecision::Filtered;
    if (j.contains("pass_rate") && j["pass_rate"].is_number()) r.pass_rate = j["pass_rate"].get<double>();
    if (j.contains("rollouts") && j["rollouts"].is_number()) r.rollouts = j["rollouts"].get<int>();
    if (j.contains("distinct_answers") && j["distinct_answers"].is_array())
      r.distinct_answers = j["distinct_answers"].get<std::set<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

void write_reports_jsonl(std::ostream& out, const std::vector<VerificationReport>& rs) {
  for (const auto& r : rs) out << report_to_json(r).dump() << '\n';
}

std::vector<VerificationReport> read_reports_jsonl(std::istream& in) {
  std::vector<VerificationReport> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": not JSON");
    out.push_back(report_from_json(j));
  }
  return out;
}

}  // namespace sf
