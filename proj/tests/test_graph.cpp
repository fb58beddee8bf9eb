// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "helpers.hpp"
#include "searchforge/graph.hpp"

using namespace sf;
using testutil::error_code;
using testutil::node;

TEST_CASE("build_graph accepts a two node chain") {
  auto g = build_graph({node("a"), node("b")}, {{"a", "b", "r"}}, true);
  CHECK(g.size() == 2);
  CHECK(g.edges().size() == 1);
  CHECK(g.out_degree("a") == 1);
  CHECK(g.in_degree("b") == 1);
}

TEST_CASE("build_graph rejects bad inputs") {
  CHECK(error_code([] { build_graph({node("a"), node("b")}, {{"a", "b", "r"}, {"b", "a", "r"}}, true); }) ==
        ErrorCode::CycleInDag);
  CHECK(error_code([] { build_graph({node("a"), node("b")}, {{"a", "c", "r"}}, true); }) == ErrorCode::DanglingEdge);
  CHECK(error_code([] { build_graph({node("a"), node("a")}, {}, true); }) == ErrorCode::DuplicateNode);
  CHECK(error_code([] { build_graph({node("a")}, {{"a", "a", "r"}}, true); }) == ErrorCode::SelfLoop);
}

TEST_CASE("undirected builds tolerate antiparallel edges") {
  auto g = build_graph({node("a"), node("b")}, {{"a", "b", "r"}, {"b", "a", "r"}}, false);
  auto u = constraint_view(g);
  CHECK(u.edge_count() == 1);
  CHECK(u.has_edge(0, 1));
}

TEST_CASE("constraint view of a path and of an edgeless graph") {
  auto path = build_graph({node("a"), node("b"), node("c")}, {{"a", "b", "r"}, {"b", "c", "s"}}, true);
  auto u = constraint_view(path);
  CHECK(u.edge_count() == 2);
  CHECK(u.connected());
  auto empty = constraint_view(build_graph({node("a"), node("b")}, {}, true));
  CHECK(empty.size() == 2);
  CHECK(empty.edge_count() == 0);
  CHECK_FALSE(empty.connected());
}

TEST_CASE("canonical form ignores input order") {
  auto g1 = build_graph({node("b"), node("a"), node("c")}, {{"b", "c", "r"}, {"a", "b", "r"}}, true, "g");
  auto g2 = build_graph({node("c"), node("a"), node("b")}, {{"a", "b", "r"}, {"b", "c", "r"}}, true, "g");
  CHECK(g1 == g2);
  CHECK(*g1.topological_order() == std::vector<NodeId>{"a", "b", "c"});
}

TEST_CASE("validate_task_subgraph") {
  auto ok = build_graph({node("a", NodeRole::Given), node("b", NodeRole::Intermediate, {"d1"}),
                         node("c", NodeRole::Answer, {"d2"})},
                        {{"a", "b", "r"}, {"b", "c", "r"}}, true);
  CHECK(validate_task_subgraph(ok).ok());

  auto split = build_graph({node("a", NodeRole::Given), node("b", NodeRole::Answer, {"d1"}), node("c", NodeRole::Given),
                            node("d", NodeRole::Intermediate, {"d2"})},
                           {{"a", "b", "r"}, {"c", "d", "r"}}, true);
  CHECK(validate_task_subgraph(split).has(ViolationKind::Disconnected));

  auto bare = build_graph({node("a", NodeRole::Given), node("b", NodeRole::Answer)}, {{"a", "b", "r"}}, true);
  auto r = validate_task_subgraph(bare);
  CHECK(r.has(ViolationKind::UnevidencedAnswer));
  CHECK(r.violations.size() == 1);

  auto none = build_graph({node("a", NodeRole::Given), node("b", NodeRole::Intermediate, {"d"})}, {{"a", "b", "r"}}, true);
  CHECK(validate_task_subgraph(none).has(ViolationKind::NoAnswerNode));
}

TEST_CASE("attach_evidence") {
  auto g = build_graph({node("a", NodeRole::Given), node("b", NodeRole::Answer, {"x"})}, {{"a", "b", "r"}}, true);
  auto g2 = attach_evidence(g, "b", {"d1", "d2"});
  CHECK(g2.node("b").evidence == std::set<DocumentId>{"d1", "d2"});
  CHECK(g.node("b").evidence == std::set<DocumentId>{"x"});
  CHECK(error_code([&] { attach_evidence(g, "zz", {"d1"}); }) == ErrorCode::UnknownNode);

  auto g3 = build_graph({node("a", NodeRole::Given), node("m", NodeRole::Intermediate, {"d"}),
                         node("b", NodeRole::Answer, {"x"})},
                        {{"a", "m", "r"}, {"m", "b", "r"}}, true);
  auto cleared = attach_evidence(g3, "m", {});
  CHECK(cleared.node("m").evidence.empty());
  auto rep = validate_task_subgraph(cleared);
  CHECK(rep.has(ViolationKind::UnevidencedIntermediate));
}

TEST_CASE("graph json round trip") {
  auto n = node("a", NodeRole::Given, {"d1"});
  n.attributes["lat"] = "48.85";
  auto g = build_graph({n, node("b", NodeRole::Answer, {"d2", "d3"})}, {{"a", "b", "located_in"}}, true, "gid");
  auto back = graph_from_json(graph_to_json(g));
  CHECK(back == g);
  CHECK(back.node("a").numeric_attribute("lat").value() == doctest::Approx(48.85));
  CHECK(graph_to_jsonl(g).find('\n') == std::string::npos);
}

TEST_CASE("induced subgraph keeps edges between kept nodes") {
  auto g = build_graph({node("a"), node("b"), node("c"), node("d")},
                       {{"a", "b", "r"}, {"b", "c", "r"}, {"a", "c", "r"}, {"c", "d", "r"}}, true);
  auto sub = g.induced({"a", "b", "c"});
  CHECK(sub.size() == 3);
  CHECK(sub.edges().size() == 3);
}
