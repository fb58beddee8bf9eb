// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "searchforge/fixtures.hpp"
#include "searchforge/seeds.hpp"
#include "searchforge/synthesis.hpp"
#include "searchforge/treewidth.hpp"

using namespace sf;
using testutil::error_code;
using testutil::node;

namespace {

SeedPage page(std::string title, std::size_t len, std::set<std::string> aliases = {}) {
  SeedPage p;
  p.title = std::move(title);
  p.body = std::string(len, 'x');
  p.aliases = std::move(aliases);
  return p;
}

ReasoningGraph path5() {
  std::vector<GraphNode> ns;
  std::vector<GraphEdge> es;
  for (char c = 'a'; c <= 'e'; ++c) ns.push_back(node(std::string(1, c), NodeRole::Intermediate, {std::string("d") + c}));
  for (char c = 'a'; c < 'e'; ++c) es.push_back({std::string(1, c), std::string(1, static_cast<char>(c + 1)), "located_in"});
  return build_graph(ns, es, true, "p5");
}

TaskSpec task_with(std::optional<int> k, std::optional<int> msd, int k_upper = 2) {
  TaskSpec t;
  t.id = "t";
  ComplexityReport r;
  r.treewidth_exact = k;
  r.treewidth_upper = k_upper;
  r.msd = msd;
  r.msd_upper = msd;
  t.complexity = r;
  return t;
}

}  // namespace

TEST_CASE("seed filter cascade") {
  SeedFilterConfig cfg;
  SeedFilter f(cfg);
  CHECK_FALSE(f.accept(page("Short", 100)));
  CHECK(f.stats().too_short == 1);
  CHECK_FALSE(f.accept(page("List of rivers", 1000)));
  CHECK(f.stats().structure == 1);
  auto meta = page("Rivers", 1000);
  meta.ns = "Category:";
  CHECK_FALSE(f.accept(meta));
  CHECK(f.accept(page("Seine", 1000, {"La Seine"})));
  CHECK_FALSE(f.accept(page("La Seine", 1000)));
  CHECK(f.stats().duplicate == 1);
  CHECK(f.stats().kept == 1);
  CHECK_FALSE(f.accept(page("Huge", 60'000)));
  CHECK(f.stats().too_long == 1);
}

TEST_CASE("seed concept filter and failures") {
  SeedFilterConfig cfg;
  cfg.concept_filter = [](const SeedPage& p) {
    if (p.title == "Boom") throw std::runtime_error("down");
    return p.title != "Justice";
  };
  auto kept = filter_seeds({page("Justice", 800), page("Paris", 800), page("Boom", 800)}, cfg);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].title == "Paris");
  CHECK(kept[1].title == "Boom");
}

TEST_CASE("seed jsonl stream counts malformed lines") {
  std::istringstream in("{\"title\":\"Paris\",\"body\":\"" + std::string(600, 'a') + "\"}\nnot json\n{\"body\":\"x\"}\n");
  std::ostringstream out;
  auto st = filter_seeds_jsonl(in, out, {});
  CHECK(st.kept == 1);
  CHECK(st.malformed == 2);
  CHECK(seed_from_json(nlohmann::json::parse(out.str())).title == "Paris");
}

TEST_CASE("enrichment adds shared-evidence edges and keeps the DAG") {
  auto g = build_graph({node("a", NodeRole::Given, {"d7"}), node("b", NodeRole::Intermediate, {"d1"}),
                        node("c", NodeRole::Intermediate, {"d7"}), node("d", NodeRole::Answer, {"d2"})},
                       {{"a", "b", "r"}, {"b", "c", "r"}, {"c", "d", "r"}}, true);
  auto before = treewidth_exact(constraint_view(g));
  auto r = enrich_topology(g, {});
  REQUIRE(r.added.size() == 1);
  CHECK(r.added[0] == GraphEdge{"a", "c", "co_documented"});
  CHECK(r.graph.topological_order().has_value());
  CHECK(r.graph.edges().size() == 4);
  CHECK(before == 1);
  CHECK(treewidth_exact(constraint_view(r.graph)) == 2);

  auto plain = build_graph({node("a", NodeRole::Given, {"d1"}), node("b", NodeRole::Answer, {"d2"})}, {{"a", "b", "r"}}, true);
  CHECK(enrich_topology(plain, {}).graph == plain);
}

TEST_CASE("enrichment plugin edges are screened") {
  auto g = build_graph({node("a", NodeRole::Given, {"d1"}), node("b", NodeRole::Intermediate, {"d2"}),
                        node("c", NodeRole::Answer, {"d3"})},
                       {{"a", "b", "r"}, {"b", "c", "r"}}, true);
  auto r = enrich_topology(g, {}, [](const ReasoningGraph&) {
    return std::vector<GraphEdge>{{"a", "zz", "r"}, {"c", "a", "r"}, {"a", "c", "r"}, {"b", "a", "r"}};
  });
  CHECK(r.rejected.size() == 3);
  CHECK(r.rejected[0].reason == "dangling endpoint");
  CHECK(r.added == std::vector<GraphEdge>{{"a", "c", "r"}});

  auto failing = enrich_topology(g, {}, [](const ReasoningGraph&) -> std::vector<GraphEdge> { throw std::runtime_error("x"); });
  CHECK(failing.plugin_error.has_value());
  CHECK(failing.graph == g);
}

TEST_CASE("subgraph sampling") {
  auto g = path5();
  auto subs = sample_subgraphs(g, 10, 3, 3, 1);
  CHECK(subs.size() == 3);  // a path on five nodes has three connected 3-sets
  std::set<std::set<NodeId>> seen;
  for (const auto& s : subs) {
    CHECK(s.size() == 3);
    CHECK(constraint_view(s).connected());
    std::set<NodeId> ids;
    for (const auto& n : s.nodes()) ids.insert(n.id);
    CHECK(seen.insert(ids).second);
  }
  CHECK(error_code([&] { sample_subgraphs(g, 1, 6, 6, 1); }) == ErrorCode::SizeRangeInfeasible);
  CHECK(sample_subgraphs(g, 10, 2, 4, 9) == sample_subgraphs(g, 10, 2, 4, 9));
}

TEST_CASE("answer selection") {
  auto chain = build_graph({node("a", NodeRole::Given), node("b"), node("c")}, {{"a", "b", "r"}, {"b", "c", "r"}}, true);
  auto sel = select_answer_node(chain, AnswerRole::DeepLeaf);
  CHECK(sel.node == "c");
  CHECK(sel.graph.node("c").role == NodeRole::Answer);

  auto star = build_graph({node("x"), node("p", NodeRole::Given), node("q"), node("r"), node("s")},
                          {{"p", "x", "r"}, {"x", "q", "r"}, {"x", "r", "r"}, {"x", "s", "r"}}, true);
  CHECK(select_answer_node(star, AnswerRole::Hub).node == "x");

  auto twins = build_graph({node("a", NodeRole::Given), node("z"), node("m")}, {{"a", "z", "r"}, {"a", "m", "r"}}, true);
  CHECK(select_answer_node(twins, AnswerRole::DeepLeaf).node == "m");

  auto all_given = build_graph({node("a", NodeRole::Given), node("b", NodeRole::Given)}, {{"a", "b", "r"}}, true);
  CHECK(error_code([&] { select_answer_node(all_given, AnswerRole::DeepLeaf); }) == ErrorCode::NoEligibleNode);
}

TEST_CASE("question rendering") {
  auto g = build_graph({node("a", NodeRole::Given, {}, "Paris"), node("b", NodeRole::Intermediate, {"d"}, "Marie Curie"),
                        node("c", NodeRole::Answer, {"d2"}, "Sorbonne")},
                       {{"b", "a", "born_in"}, {"b", "c", "studied_at"}}, true);
  auto q = render_question(g, "c", TemplateLibrary::defaults());
  CHECK(q == "Identify X: Marie Curie was born in Paris; Marie Curie studied at X.");
  CHECK_FALSE(leaks_answer(q, "Sorbonne"));

  auto odd = build_graph({node("a", NodeRole::Given), node("b", NodeRole::Answer, {"d"})}, {{"a", "b", "unheard_of"}}, true);
  CHECK(error_code([&] { render_question(odd, "b", TemplateLibrary::defaults()); }) == ErrorCode::MissingTemplate);

  auto leaky = [](const ReasoningGraph&, const NodeId&) { return std::string("Which SORBONNE, exactly?"); };
  CHECK(error_code([&] { render_question(g, "c", TemplateLibrary::defaults(), leaky); }) == ErrorCode::AnswerLeakage);

  auto broken = [](const ReasoningGraph&, const NodeId&) -> std::string { throw std::runtime_error("offline"); };
  CHECK(render_question(g, "c", TemplateLibrary::defaults(), broken) == q);

  auto lib = TemplateLibrary::from_json(TemplateLibrary::defaults().to_json());
  CHECK(lib.templates == TemplateLibrary::defaults().templates);
}

TEST_CASE("geo helpers") {
  CHECK(haversine_km(0, 0, 0, 1) == doctest::Approx(111.19).epsilon(0.001));
  CHECK(compass_direction(bearing_deg(0, 0, 1, 0)) == "north");
  CHECK(compass_direction(bearing_deg(0, 0, 0, -1)) == "west");
  CHECK(drive_duration_phrase(2.2) == "two hours'");
  CHECK(drive_duration_phrase(0.2) == "one hour's");
  CHECK(approximate_count(1234) == 1200);
  CHECK(approximate_count(87) == 87);
}

TEST_CASE("tool constraint injection") {
  auto city = node("c", NodeRole::Intermediate, {"d2"}, "Lyon");
  city.attributes = {{"lat", "45.76"}, {"lon", "4.84"}};
  auto anchor = node("y", NodeRole::Given, {}, "Paris");
  anchor.attributes = {{"lat", "48.86"}, {"lon", "2.35"}};
  auto prof = node("p", NodeRole::Intermediate, {"d3"}, "Ada Byron");
  prof.attributes = {{"citations", "1234"}};
  auto g = build_graph({anchor, city, prof, node("x", NodeRole::Answer, {"d4"}, "Zed Prize")},
                       {{"c", "y", "located_in"}, {"p", "c", "born_in"}, {"p", "x", "works_at"}}, true);
  TaskSpec t;
  t.id = "t1";
  t.subgraph = g;
  t.answer_node = "x";
  t.answer_text = "Zed Prize";
  t.question_text = render_question(g, "x", TemplateLibrary::defaults());
  auto out = inject_tool_constraints(t, InjectionRuleSet::defaults());
  CHECK_FALSE(out.injection_noop);
  REQUIRE(out.injected_constraints.size() == 2);
  CHECK(out.question_text.find("Lyon") == std::string::npos);
  CHECK(out.question_text.find("the city about five hours' drive southeast of Paris") != std::string::npos);
  CHECK(out.question_text.find("the scholar with approximately 1200 citations") != std::string::npos);

  auto plain = build_graph({node("a", NodeRole::Given, {}, "Foo"), node("x", NodeRole::Answer, {"d"}, "Bar")},
                           {{"a", "x", "located_in"}}, true);
  TaskSpec t2;
  t2.subgraph = plain;
  t2.answer_node = "x";
  t2.answer_text = "Bar";
  t2.question_text = render_question(plain, "x", TemplateLibrary::defaults());
  auto same = inject_tool_constraints(t2, InjectionRuleSet::defaults());
  CHECK(same.injection_noop);
  CHECK(same.question_text == t2.question_text);
}

TEST_CASE("dual constraint gate") {
  CHECK(dual_constrained_accept(task_with(2, 3), 2, 3, 2).accepted);
  CHECK_FALSE(dual_constrained_accept(task_with(1, 3), 2, 3, 2).accepted);
  CHECK_FALSE(dual_constrained_accept(task_with(2, 1), 2, 3, 2).accepted);
  CHECK_FALSE(dual_constrained_accept(task_with(4, 3), 2, 3, 2).accepted);
  auto bounded = dual_constrained_accept(task_with(std::nullopt, 3, 3), 2, 3, 2);
  CHECK(bounded.accepted);
  CHECK(bounded.used_treewidth_upper);
  TaskSpec bare;
  CHECK(error_code([&] { dual_constrained_accept(bare, 2, 3, 2); }) == ErrorCode::MissingComplexityReport);
}

TEST_CASE("synthesis on the fixture world is deterministic and gated") {
  WorldConfig wc;
  wc.graphs = 4;
  wc.base_documents = 200;
  auto w = make_world(wc);
  SynthesisConfig cfg;
  cfg.seed = 42;
  SynthesisStats st;
  auto a = synthesize(w.graphs, cfg, &st);
  auto b = synthesize(w.graphs, cfg);
  CHECK(a == b);
  CHECK(!a.empty());
  CHECK(st.emitted == a.size());
  for (const auto& t : a) {
    REQUIRE(t.complexity.has_value());
    CHECK(*t.complexity->treewidth_exact >= 2);
    CHECK(*t.complexity->msd >= 2);
    CHECK_FALSE(leaks_answer(t.question_text, t.answer_text));
    CHECK(task_from_json(task_to_json(t)) == t);
  }
  cfg.seed = 43;
  CHECK(synthesize(w.graphs, cfg) != a);
}
