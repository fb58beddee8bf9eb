// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "searchforge/agent.hpp"
#include "searchforge/verifier.hpp"

using namespace sf;
using testutil::error_code;
using testutil::node;

namespace {

// Returns `answer_rank` - 1 filler results, then the answer snippet.
class StubBackend : public SearchBackend {
 public:
  explicit StubBackend(int answer_rank, std::string answer = "Sorbonne") : rank_(answer_rank), answer_(std::move(answer)) {}
  std::vector<std::vector<SearchResult>> search(const std::vector<std::string>& queries, int top_k) override {
    ++calls;
    std::vector<std::vector<SearchResult>> out;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      std::vector<SearchResult> list;
      for (int i = 1; i <= top_k; ++i) {
        SearchResult r;
        r.title = "r" + std::to_string(i);
        r.url = "https://stub.example/" + std::to_string(i);
        r.snippet = i == rank_ ? "studied at the " + answer_ + " in 1890" : "nothing here";
        list.push_back(r);
      }
      out.push_back(list);
    }
    return out;
  }
  std::vector<VisitResult> visit(const std::vector<std::string>& urls, const std::string&) override {
    std::vector<VisitResult> out;
    for (const auto& u : urls) out.push_back({u, VisitStatus::NotFound, ""});
    return out;
  }
  int calls = 0;

 private:
  int rank_;
  std::string answer_;
};

class DeadBackend : public SearchBackend {
 public:
  std::vector<std::vector<SearchResult>> search(const std::vector<std::string>&, int) override {
    throw Error(ErrorCode::EnvironmentUnreachable, "down");
  }
  std::vector<VisitResult> visit(const std::vector<std::string>&, const std::string&) override {
    throw Error(ErrorCode::EnvironmentUnreachable, "down");
  }
};

TaskSpec sample_task() {
  TaskSpec t;
  t.id = "task-1";
  t.subgraph = build_graph({node("a", NodeRole::Given, {}, "Paris"), node("b", NodeRole::Intermediate, {"d1"}, "Marie"),
                            node("c", NodeRole::Answer, {"d2"}, "Sorbonne")},
                           {{"b", "a", "born_in"}, {"b", "c", "studied_at"}}, true);
  t.answer_node = "c";
  t.answer_text = "Sorbonne";
  t.question_text = "Identify X: Marie was born in Paris; Marie studied at X.";
  return t;
}

AgentPlugin scripted(std::vector<std::string> answers, std::vector<bool> consistent = {}) {
  return [answers, consistent](const TaskSpec&, SearchBackend&, int i) {
    RolloutResult r;
    r.final_answer = answers.at(static_cast<std::size_t>(i));
    r.consistent = consistent.empty() ? true : consistent.at(static_cast<std::size_t>(i));
    return r;
  };
}

}  // namespace

TEST_CASE("enum names round trip") {
  for (auto k : {StageKind::SolverPrefilter, StageKind::Retrievability, StageKind::Consistency, StageKind::RolloutVerify,
                 StageKind::Uniqueness})
    CHECK(parse_stage_kind(to_string(k)) == k);
  for (auto o : {Outcome::Pass, Outcome::Fail, Outcome::Skipped, Outcome::PluginUnavailable})
    CHECK(parse_outcome(to_string(o)) == o);
}

TEST_CASE("solver prefilter") {
  auto t = sample_task();
  CHECK(stage_solver_prefilter(t, [](const TaskSpec&) { return std::string("  sorbonne! "); }) == Outcome::Fail);
  CHECK(stage_solver_prefilter(t, [](const TaskSpec&) { return std::string("Oxford"); }) == Outcome::Pass);
  CHECK(stage_solver_prefilter(t, {}) == Outcome::PluginUnavailable);
}

TEST_CASE("retrievability by snippet rank") {
  auto t = sample_task();
  StubBackend at3(3), at51(51), absent(0);
  std::string detail;
  CHECK(stage_retrievability(t, at3, 50, &detail) == Outcome::Pass);
  CHECK(detail == "answer in snippet at rank 3");
  CHECK(stage_retrievability(t, at51, 50) == Outcome::Fail);
  CHECK(stage_retrievability(t, absent, 50) == Outcome::Fail);
}

TEST_CASE("consistency stage") {
  auto t = sample_task();
  EvidenceBundle b{{"Marie born_in Paris"}, {"Marie lived in Paris"}};
  CHECK(stage_consistency(t, b, [](const TaskSpec&, const EvidenceBundle&) { return ConsistencyVerdict{true, ""}; }) ==
        Outcome::Pass);
  CHECK(stage_consistency(t, b, [](const TaskSpec&, const EvidenceBundle&) {
          return ConsistencyVerdict{false, "Paris vs Lyon"};
        }) == Outcome::Fail);
  CHECK(stage_consistency(t, b, {}) == Outcome::PluginUnavailable);

  auto checker = make_evidence_checker();
  CHECK(checker(t, b).consistent);
  CHECK_FALSE(checker(t, EvidenceBundle{{}, {"only Paris is here"}}).consistent);
}

TEST_CASE("rollout verification") {
  auto t = sample_task();
  StubBackend be(1);
  auto two = stage_rollout_verify(t, scripted({"Sorbonne", "x", "sorbonne", "y"}), be, 4);
  CHECK(two.outcome == Outcome::Pass);
  CHECK(two.pass_rate == 0.5);
  CHECK(two.answers.size() == 3);
  auto none = stage_rollout_verify(t, scripted({"Lyon", "Oslo", "Rome", "Kyiv"}), be, 4);
  CHECK(none.outcome == Outcome::Fail);
  CHECK(none.pass_rate == 0);
  CHECK(error_code([&] { stage_rollout_verify(t, scripted({}), be, 0); }) == ErrorCode::InvalidArgument);

  AgentPlugin flaky = [](const TaskSpec&, SearchBackend&, int i) -> RolloutResult {
    if (i == 1) throw std::runtime_error("agent crashed");
    return {"Sorbonne", true, std::nullopt};
  };
  auto r = stage_rollout_verify(t, flaky, be, 3);
  CHECK(r.matches == 2);
  CHECK(r.results[1].final_answer.empty());
  CHECK_FALSE(r.results[1].consistent);
}

TEST_CASE("uniqueness") {
  auto t = sample_task();
  auto rr = [](std::string a, bool c = true) { return RolloutResult{std::move(a), c, std::nullopt}; };
  CHECK(stage_uniqueness(t, {rr("Sorbonne"), rr("sorbonne"), rr("SORBONNE")}, {}) == Outcome::Pass);
  CHECK(stage_uniqueness(t, {rr("Sorbonne"), rr("Oxford")}, {}) == Outcome::Fail);
  CHECK(stage_uniqueness(t, {rr("Sorbonne")}, {}) == Outcome::Pass);
  CHECK(stage_uniqueness(t, {rr("Sorbonne"), rr("Oxford", false)}, {}) == Outcome::Pass);
  CHECK(stage_uniqueness(t, {rr("Sorbonne"), rr("Oxford")}, {}, 2) == Outcome::Pass);
  UniquenessJudge only_real = [](const TaskSpec&, const std::string& a) { return a != "Oxford"; };
  CHECK(stage_uniqueness(t, {rr("Sorbonne"), rr("Oxford")}, only_real) == Outcome::Pass);
  UniquenessJudge everything = [](const TaskSpec&, const std::string&) { return true; };
  CHECK(stage_uniqueness(t, {rr("Sorbonne"), rr("Oxford")}, everything) == Outcome::Fail);
}

TEST_CASE("pipeline ordering and short circuit") {
  auto t = sample_task();
  Corpus c;
  c.add({"d1", "https://x.example/d1", "Marie", "Marie was born in Paris.", std::nullopt, false});
  c.add({"d2", "https://x.example/d2", "Sorbonne", "Marie studied at the Sorbonne.", std::nullopt, false});
  StubBackend good(3);
  VerifierPlugins plugins;
  plugins.solver = [](const TaskSpec&) { return std::string("no idea"); };
  plugins.checker = make_evidence_checker();
  plugins.agent = scripted({"Sorbonne", "Sorbonne", "Oxford", "Sorbonne"}, {true, true, false, true});
  auto rep = run_pipeline(t, default_stages(), {&good, &c}, plugins);
  CHECK(rep.final == FinalDecision::Kept);
  REQUIRE(rep.stages.size() == 5);
  for (const auto& s : rep.stages) CHECK(s.outcome == Outcome::Pass);
  CHECK(rep.pass_rate == 0.75);
  CHECK(rep.rollouts == 4);

  StubBackend bad(51);
  auto failed = run_pipeline(t, default_stages(), {&bad, &c}, plugins);
  CHECK(failed.final == FinalDecision::Filtered);
  CHECK(failed.stage(StageKind::Retrievability)->outcome == Outcome::Fail);
  CHECK(failed.stage(StageKind::Consistency)->outcome == Outcome::Skipped);
  CHECK(failed.stage(StageKind::RolloutVerify)->outcome == Outcome::Skipped);
  CHECK_FALSE(failed.pass_rate.has_value());

  VerifierPlugins no_solver = plugins;
  no_solver.solver = {};
  auto lenient = run_pipeline(t, default_stages(), {&good, &c}, no_solver);
  CHECK(lenient.stage(StageKind::SolverPrefilter)->outcome == Outcome::PluginUnavailable);
  CHECK(lenient.final == FinalDecision::Kept);
  auto strict = run_pipeline(t, default_stages(), {&good, &c}, no_solver, {true, 1});
  CHECK(strict.final == FinalDecision::Filtered);
  CHECK(strict.stage(StageKind::SolverPrefilter)->outcome == Outcome::PluginUnavailable);

  VerifierPlugins throwing = plugins;
  throwing.solver = [](const TaskSpec&) -> std::string { throw std::runtime_error("timeout"); };
  CHECK(run_pipeline(t, default_stages(), {&good, &c}, throwing).stage(StageKind::SolverPrefilter)->outcome ==
        Outcome::Skipped);
  CHECK(run_pipeline(t, default_stages(), {&good, &c}, throwing, {true, 1}).final == FinalDecision::Filtered);

  DeadBackend dead;
  CHECK(error_code([&] { run_pipeline(t, default_stages(), {&dead, &c}, plugins); }) ==
        ErrorCode::EnvironmentUnreachable);
  CHECK(error_code([&] { run_pipeline(t, default_stages(), {nullptr, &c}, plugins); }) == ErrorCode::InvalidArgument);
  auto dup = default_stages();
  dup.push_back(dup[0]);
  CHECK(error_code([&] { run_pipeline(t, dup, {&good, &c}, plugins); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("stage parameters come from config") {
  auto cfg = pipeline_config_from_json(nlohmann::json::parse(R"({
    "strict": true, "uniqueness_threshold": 2,
    "stages": [{"name": "retr", "kind": "retrievability", "params": {"top_k": "2"}},
               {"name": "ro", "kind": "rollout_verify", "params": {"n": 2}}]})"));
  CHECK(cfg.options.strict);
  CHECK(cfg.options.uniqueness_threshold == 2);
  REQUIRE(cfg.stages.size() == 2);
  CHECK(cfg.stages[0].int_param("top_k", 50) == 2);
  auto back = pipeline_config_from_json(pipeline_config_to_json(cfg));
  CHECK(back.stages.size() == 2);
  CHECK(back.stages[1].int_param("n", 4) == 2);

  auto t = sample_task();
  StubBackend at3(3);
  VerifierPlugins p;
  p.agent = scripted({"Sorbonne", "Sorbonne"});
  auto rep = run_pipeline(t, cfg.stages, {&at3, nullptr}, p, cfg.options);
  CHECK(rep.stage(StageKind::Retrievability)->outcome == Outcome::Fail);
  CHECK(error_code([] { pipeline_config_from_json(nlohmann::json::parse(R"({"stages":[{"name":"x","kind":"magic"}]})")); }) ==
        ErrorCode::ConfigInvalid);
}

TEST_CASE("report jsonl and curation") {
  VerificationReport a, b, c, d;
  a.task_id = "a";
  a.pass_rate = 0.0;
  b.task_id = "b";
  b.pass_rate = 1.0;
  c.task_id = "c";
  c.pass_rate = 0.5;
  c.rollouts = 4;
  c.distinct_answers = std::set<std::string>{"x", "y"};
  c.stages.push_back({"retrievability", StageKind::Retrievability, Outcome::Pass, "ok"});
  CHECK(curate_rl_queries({a, b, c}) == std::vector<std::string>{"c"});
  d.task_id = "d";
  CHECK(error_code([&] { curate_rl_queries({a, d}); }) == ErrorCode::MissingPassRate);

  std::ostringstream out;
  write_reports_jsonl(out, {a, c});
  std::istringstream in(out.str());
  auto back = read_reports_jsonl(in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].pass_rate == 0.5);
  CHECK(back[1].distinct_answers == c.distinct_answers);
  CHECK(back[1].stages.at(0).outcome == Outcome::Pass);
}
