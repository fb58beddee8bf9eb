// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "searchforge/complexity.hpp"
#include "searchforge/dispersion.hpp"
#include "searchforge/env_service.hpp"
#include "searchforge/fixtures.hpp"
#include "searchforge/grpo.hpp"
#include "searchforge/pipeline.hpp"
#include "searchforge/text.hpp"
#include "searchforge/trajectory.hpp"
#include "searchforge/treewidth.hpp"
#include "searchforge/verifier.hpp"

using namespace sf;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void guarded(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("threw ") + e.what());
  }
}

// ---------------------------------------------------------------------------

struct TwCase {
  UndirectedGraph g;
  TreewidthResult r;
};
std::vector<TwCase> tw_cases;

void treewidth_oracle() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  auto t0 = Clock::now();
  for (int i = 0; i < 500; ++i) {
    auto sg = oracle::random_graph(rng, 8, 0.0, 1.0);
    auto u = testutil::to_undirected(sg);
    auto r = exact_treewidth(u);
    if (r.width != oracle::brute_treewidth(sg.n, sg.edges)) ++mismatches;
    tw_cases.push_back({u, r});
  }
  const double secs = seconds_since(t0);
  auto shapes = reference_shapes();
  std::vector<int> anchors;
  for (const auto& g : shapes) anchors.push_back(treewidth_exact(constraint_view(g)));
  bool ok = mismatches == 0 && secs < 60 && anchors == std::vector<int>{1, 2, 3};
  report("treewidth_oracle_equivalence", ok,
         std::to_string(500 - mismatches) + "/500 match brute force in " + fmt("%.2f", secs) +
             " s; chain/cycle/clique = " + std::to_string(anchors[0]) + "/" + std::to_string(anchors[1]) + "/" +
             std::to_string(anchors[2]));
}

void decomposition_certification() {
  int certified = 0;
  for (const auto& c : tw_cases) {
    auto v = validate_tree_decomposition(c.g, c.r.decomposition);
    if (v.valid && v.width == c.r.width) ++certified;
  }
  // Fuzz: break one condition at a time and expect that condition reported.
  std::mt19937_64 rng(77);
  std::map<TdCondition, std::pair<int, int>> fuzz;  // condition -> (caught, tried)
  for (const auto& c : tw_cases) {
    const auto& td = c.r.decomposition;
    const int n = c.g.size();
    if (n == 0) continue;
    auto check = [&](TdCondition cond, const TreeDecomposition& broken) {
      auto v = validate_tree_decomposition(c.g, broken);
      auto& slot = fuzz[cond];
      ++slot.second;
      if (!v.valid && v.violates(cond)) ++slot.first;
    };
    {
      // drop a vertex from every bag
      const NodeId victim = c.g.name(static_cast<int>(rng() % static_cast<unsigned>(n)));
      auto b = td;
      for (auto& bag : b.bags) bag.erase(victim);
      check(TdCondition::VertexUncovered, b);
    }
    auto edges = c.g.edges();
    if (!edges.empty()) {
      // separate one edge's endpoints: drop the second endpoint from every
      // bag holding both
      auto [a, bidx] = edges[rng() % edges.size()];
      const NodeId u = c.g.name(a), w = c.g.name(bidx);
      auto b = td;
      for (auto& bag : b.bags)
        if (bag.count(u) && bag.count(w)) bag.erase(w);
      check(TdCondition::EdgeUncovered, b);
    }
    if (td.bags.size() >= 3) {
      // put a vertex into a bag at distance >= 2 from all bags holding it
      const int m = static_cast<int>(td.bags.size());
      std::vector<std::vector<int>> adj(static_cast<size_t>(m));
      for (auto [x, y] : td.tree_edges) {
        adj[x].push_back(y);
        adj[y].push_back(x);
      }
      bool done = false;
      for (int vi = 0; vi < n && !done; ++vi) {
        const NodeId v = c.g.name(vi);
        std::set<int> holders, near;
        for (int i = 0; i < m; ++i)
          if (td.bags[i].count(v)) holders.insert(i);
        for (int h : holders) {
          near.insert(h);
          for (int y : adj[h]) near.insert(y);
        }
        for (int j = 0; j < m && !done; ++j) {
          if (near.count(j)) continue;
          auto b = td;
          b.bags[j].insert(v);
          check(TdCondition::SubtreeDisconnected, b);
          done = true;
        }
      }
    }
    if (td.bags.size() >= 2) {
      auto b = td;
      b.tree_edges.pop_back();
      check(TdCondition::NotATree, b);
      if (td.bags.size() >= 3) {
        auto cyc = td;
        std::set<std::pair<int, int>> have(td.tree_edges.begin(), td.tree_edges.end());
        for (int x = 0; x < static_cast<int>(td.bags.size()); ++x)
          for (int y = x + 1; y < static_cast<int>(td.bags.size()); ++y)
            if (!have.count({x, y}) && !have.count({y, x}) && cyc.tree_edges.size() == td.tree_edges.size())
              cyc.tree_edges.push_back({x, y});
        if (cyc.tree_edges.size() > td.tree_edges.size()) check(TdCondition::NotATree, cyc);
      }
    }
  }
  bool ok = certified == static_cast<int>(tw_cases.size());
  std::string detail = std::to_string(certified) + "/" + std::to_string(tw_cases.size()) + " exact results certified";
  for (auto& [cond, ct] : fuzz) {
    ok = ok && ct.first == ct.second && ct.second > 0;
    detail += "; " + std::string(to_string(cond)) + " " + std::to_string(ct.first) + "/" + std::to_string(ct.second);
  }
  ok = ok && fuzz.size() == 4;
  report("tree_decomposition_certification", ok, detail);
}

void msd_oracle() {
  std::mt19937_64 rng(99);
  int exact_ok = 0, greedy_ok = 0;
  auto t0 = Clock::now();
  for (int it = 0; it < 300; ++it) {
    const int n_facts = std::uniform_int_distribution<int>(1, 8)(rng);
    const int n_docs = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<std::set<int>> docs(static_cast<size_t>(n_docs));
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.1, 0.6)(rng));
    for (auto& d : docs)
      for (int f = 0; f < n_facts; ++f)
        if (coin(rng)) d.insert(f);
    for (int f = 0; f < n_facts; ++f) docs[std::uniform_int_distribution<int>(0, n_docs - 1)(rng)].insert(f);

    std::map<int, std::set<DocumentId>> ev;
    for (int d = 0; d < n_docs; ++d)
      for (int f : docs[d]) ev[f].insert("doc" + std::to_string(d));
    std::vector<GraphNode> nodes{testutil::node("given", NodeRole::Given, {"doc0"})};
    std::vector<GraphEdge> edges;
    for (int f = 0; f < n_facts; ++f) {
      const std::string id = "f" + std::to_string(f);
      nodes.push_back(testutil::node(id, f == 0 ? NodeRole::Answer : NodeRole::Intermediate, ev[f]));
      edges.push_back({"given", id, "r"});
    }
    auto g = build_graph(nodes, edges, true);
    const int bf = oracle::brute_min_cover(n_facts, docs);
    const int ex = msd_exact(g);
    if (ex == bf) ++exact_ok;
    if (msd_greedy(g) >= ex) ++greedy_ok;
  }
  const double secs = seconds_since(t0);
  report("msd_oracle_equivalence", exact_ok == 300 && greedy_ok == 300 && secs < 30,
         std::to_string(exact_ok) + "/300 exact match, " + std::to_string(greedy_ok) + "/300 greedy >= exact, " +
             fmt("%.2f", secs) + " s");
}

void grpo_numerics() {
  auto a = group_advantages({1, 0, 0, 0}, 0);
  const double s3 = std::sqrt(3.0);
  bool hand = std::abs(a[0] - s3) < 1e-9;
  for (int i = 1; i < 4; ++i) hand = hand && std::abs(a[i] + 1 / s3) < 1e-9;
  auto b = group_advantages({1, 1, 0, 0}, 0);
  const std::vector<double> bexp{1, 1, -1, -1};
  for (int i = 0; i < 4; ++i) hand = hand && std::abs(b[i] - bexp[i]) < 1e-9;

  // Binary and graded rewards on a 1/8 grid with integer shifts: every
  // intermediate is representable, so equality must be bitwise.
  std::mt19937_64 rng(5);
  int exact = 0;
  for (int it = 0; it < 1000; ++it) {
    const std::size_t k = 2 + rng() % 15;
    std::vector<double> r(k), shifted(k);
    const bool graded = it % 2 == 1;
    for (auto& x : r) x = graded ? static_cast<double>(rng() % 9) / 8.0 : static_cast<double>(rng() % 2);
    if (std::all_of(r.begin(), r.end(), [&](double v) { return v == r[0]; })) r[0] = r[0] == 0 ? 1 : 0;
    const double c = static_cast<double>(static_cast<long long>(rng() % 2001) - 1000);
    for (std::size_t i = 0; i < k; ++i) shifted[i] = r[i] + c;
    if (group_advantages(r, 1e-6) == group_advantages(shifted, 1e-6)) ++exact;
  }

  ClipConfig cfg;  // eps_low 0.2, eps_high 0.28
  const double up = clipped_term(2.0, 1.0, cfg);
  const double down = clipped_term(0.5, -1.0, cfg);
  const double mid = clipped_term(1.0, 1.0, cfg);
  bool clip = std::abs(up - 1.28) < 1e-12 && std::abs(down + 0.8) < 1e-12 && std::abs(mid - 1.0) < 1e-12;
  report("grpo_numerics", hand && exact == 1000 && clip,
         std::string("hand advantages ") + (hand ? "ok" : "off") + ", shift invariance exact on " +
             std::to_string(exact) + "/1000 groups, clip fixtures " + fmt("%.12f", up) + " / " + fmt("%.12f", down));
}

// Solvability and the gate share one run of the default demo.
DemoArtifacts demo_art;
DemoSummary demo_sum;
double demo_secs = 0;

void solvability() {
  DemoConfig cfg;  // 10k-document world, noise ratio 5
  auto t0 = Clock::now();
  demo_sum = end_to_end_demo(cfg, &demo_art);
  demo_secs = seconds_since(t0);
  const auto& c = demo_sum.completeness;
  bool ok = demo_sum.ingested == 10'000 && cfg.noise_ratio == 5.0 && demo_sum.tasks > 0 &&
            c.complete_tasks == demo_sum.tasks && c.missing_evidence_tasks == 0 && demo_secs < 300;
  report("solvability_guarantee", ok,
         std::to_string(c.complete_tasks) + "/" + std::to_string(demo_sum.tasks) + " tasks complete, " +
             std::to_string(c.missing_evidence_tasks) + " missing evidence, corpus " +
             std::to_string(demo_sum.corpus_documents) + " docs, demo " + fmt("%.1f", demo_secs) + " s");
}

void dual_gate() {
  // Recompute both measures with the brute-force oracles, not the library.
  int tw1 = 0, msd1 = 0, checked = 0;
  for (const auto& t : demo_art.tasks) {
    auto u = constraint_view(t.subgraph);
    const auto edges = u.edges();
    const int tw = oracle::brute_treewidth(u.size(), edges);
    std::vector<DocumentId> universe;
    std::vector<const GraphNode*> need;
    for (const auto& n : t.subgraph.nodes())
      if (n.role != NodeRole::Given) need.push_back(&n);
    std::set<DocumentId> docs;
    for (const auto* n : need) docs.insert(n->evidence.begin(), n->evidence.end());
    universe.assign(docs.begin(), docs.end());
    std::vector<std::set<int>> facts_of_doc(universe.size());
    for (std::size_t d = 0; d < universe.size(); ++d)
      for (std::size_t f = 0; f < need.size(); ++f)
        if (need[f]->evidence.count(universe[d])) facts_of_doc[d].insert(static_cast<int>(f));
    const int msd = oracle::brute_min_cover(static_cast<int>(need.size()), facts_of_doc);
    tw1 += tw <= 1;
    msd1 += msd <= 1;
    ++checked;
  }
  report("dual_constraint_gate", checked > 0 && tw1 == 0 && msd1 == 0,
         std::to_string(checked) + " emitted tasks checked, " + std::to_string(tw1) + " with treewidth <= 1, " +
             std::to_string(msd1) + " with dispersion <= 1");
}

Corpus ranked_fixture(int answer_rank) {
  // 60 equal-length pages; page i holds the query term 61 - i times, so
  // BM25 ranks them by index. The answer name sits on page `answer_rank`.
  Corpus c;
  for (int i = 1; i <= 60; ++i) {
    std::string body = i == answer_rank ? "Kelvarine Moss " : "Other Name ";
    for (int j = 0; j < 61 - i; ++j) body += "zorblat ";
    for (int j = 0; j < i; ++j) body += "filler ";
    char id[16];
    std::snprintf(id, sizeof id, "r%02d", i);
    c.add({id, std::string("https://rank.example/") + id, std::string("Page ") + id, body, std::nullopt, false});
  }
  return c;
}

void interface_consistency() {
  EnvService svc(demo_art.index, {});
  const int port = svc.start();
  httplib::Client cli("127.0.0.1", port);
  cli.set_keep_alive(true);
  int total = 0, valid = 0;
  auto validate = [&](const httplib::Result& res, const json& schema) {
    ++total;
    if (res && res->status == 200 && schema_violations(schema, json::parse(res->body)).empty()) ++valid;
  };
  const auto& tasks = demo_art.tasks;
  for (std::size_t i = 0; i < tasks.size() && i < 200; ++i) {
    json sreq = {{"query", {tasks[i].question_text, tasks[i].answer_text}}};
    if (i % 3 == 0) sreq["top_k"] = 50;
    auto sres = cli.Post("/search", sreq.dump(), "application/json");
    validate(sres, search_response_schema());
    std::vector<std::string> urls;
    const json sbody = sres && sres->status == 200 ? json::parse(sres->body) : json::array();
    if (!sbody.empty())
      for (const auto& hit : sbody[0]) {
        urls.push_back(hit["url"].get<std::string>());
        if (urls.size() == 3) break;
      }
    urls.push_back("https://unknown.example/" + std::to_string(i));
    json vreq = {{"url", urls}, {"goal", tasks[i].question_text}};
    validate(cli.Post("/visit", vreq.dump(), "application/json"), visit_response_schema());
  }
  svc.stop();

  // Rank-controlled retrievability through the HTTP backend.
  std::map<int, Outcome> outcome;
  int top_k = 0;
  for (const auto& st : default_stages())
    if (st.kind == StageKind::Retrievability) top_k = st.int_param("top_k", 50);
  for (int rank : {3, 51}) {
    auto idx = std::make_shared<const IndexSnapshot>(IndexSnapshot::build(ranked_fixture(rank)));
    auto top = idx->search_one("zorblat", 60);
    const bool placed = top.size() == 60 && top[static_cast<std::size_t>(rank - 1)].doc_id == (rank == 3 ? "r03" : "r51");
    EnvService fixture(idx, {});
    const int fport = fixture.start();
    HttpSearchBackend backend("127.0.0.1", fport);
    TaskSpec t;
    t.id = "rank-" + std::to_string(rank);
    t.question_text = "zorblat";
    t.answer_text = "Kelvarine Moss";
    outcome[rank] = placed ? stage_retrievability(t, backend, top_k) : Outcome::Skipped;
    fixture.stop();
  }
  bool ok = total > 0 && valid == total && outcome[3] == Outcome::Pass && outcome[51] == Outcome::Fail;
  report("interface_consistency", ok,
         std::to_string(valid) + "/" + std::to_string(total) + " responses schema-valid; top-" + std::to_string(top_k) +
             " retrievability rank 3 -> " + std::string(to_string(outcome[3])) + ", rank 51 -> " +
             std::string(to_string(outcome[51])));
}

void context_management() {
  ContextPolicy p;  // 131072 budget, 0.9 fraction
  const std::int64_t limit = p.threshold();
  const std::string q = "Which river port, founded by a guild whose seal shows a heron, lies two hours' drive west of Aldmere?";

  auto step = [](std::size_t obs_chars) {
    Step s;
    s.thought = "read more";
    s.action.tool_name = "visit";
    s.action.arguments = nlohmann::ordered_json{{"url", {"https://a.example/x"}}, {"goal", "port"}};
    s.observation = std::string(obs_chars, 'o');
    return s;
  };
  // Agent loop: add pages until the estimate crosses the threshold.
  auto t = make_trajectory("ctx", q);
  int resets_seen = 0;
  std::int64_t after = 0;
  for (int i = 0; i < 60 && resets_seen == 0; ++i) {
    append_step(t, step(40'000));
    if (apply_discard_all(t, p)) {
      ++resets_seen;
      after = estimate_tokens(t);
    }
  }
  const bool again = apply_discard_all(t, p);
  bool ok = resets_seen == 1 && t.resets.size() == 1 && !again && t.question == q && after < limit &&
            t.resets[0].tokens_before > limit && t.steps.empty();

  // Boundary: estimate exactly at the threshold.
  auto edge = make_trajectory("edge", q);
  const std::size_t fixed = q.size() + step(0).thought.size() + render_tool_call(step(0).action).size();
  edge.steps.clear();
  append_step(edge, step(static_cast<std::size_t>(limit) * 4 - fixed));
  const std::int64_t at = estimate_tokens(edge);
  const bool boundary_fired = apply_discard_all(edge, p);
  ok = ok && at == limit && !boundary_fired && edge.resets.empty();
  report("context_management", ok,
         std::to_string(t.resets.size()) + " reset at " + std::to_string(t.resets.empty() ? 0 : t.resets[0].tokens_before) +
             " tokens (threshold " + std::to_string(limit) + "), after " + std::to_string(after) + ", question " +
             (t.question == q ? "byte-exact" : "changed") + "; boundary estimate " + std::to_string(at) +
             (boundary_fired ? " fired" : " did not fire"));
}

void sft_filter_check() {
  // 50 trajectories over 12 questions with mixed faults.
  std::mt19937_64 rng(8);
  std::map<std::string, std::string> gold;
  for (int i = 0; i < 12; ++i) gold["question " + std::to_string(i)] = "answer " + std::to_string(i);
  std::vector<Trajectory> ts;
  for (int n = 0; n < 50; ++n) {
    const int qi = static_cast<int>(rng() % 12);
    const std::string q = "question " + std::to_string(qi);
    auto t = make_trajectory("traj-" + std::to_string(n), q);
    const int steps = 1 + static_cast<int>(rng() % 6);
    const int kind = static_cast<int>(rng() % 5);  // 0,1 good; 2 wrong; 3 long; 4 failing
    for (int s = 0; s < steps; ++s) {
      Step st;
      st.thought = "step";
      st.action.tool_name = "search";
      st.action.arguments = nlohmann::ordered_json{{"query", {q}}};
      st.observation = kind == 3 && s == 0 ? std::string(600'000, 'x') : "result";
      st.failed = kind == 4 && s < std::max(1, (steps + 1) / 2);
      append_step(t, st);
    }
    finalize(t, kind == 2 ? "something else" : "Answer " + std::to_string(qi));
    ts.push_back(t);
  }
  SftConfig cfg;  // 131072 tokens, 0.3 failed fraction
  SftStats st;
  auto out = sft_filter(ts, gold, cfg, &st);

  std::set<std::string> questions;
  int dup = 0, wrong = 0, over = 0, failing = 0;
  for (const auto& t : out) {
    dup += !questions.insert(t.question).second;
    wrong += !(t.final_answer && normalize_answer(*t.final_answer) == normalize_answer(gold.at(t.question)));
    over += total_tokens(t) > cfg.max_tokens;
    std::size_t f = 0;
    for (const auto& s : t.all_steps()) f += s.failed;
    failing += static_cast<double>(f) > cfg.max_failed_fraction * static_cast<double>(t.step_count());
  }
  // Independent count of questions that have at least one acceptable trajectory.
  std::set<std::string> solvable;
  for (const auto& t : ts) {
    std::size_t f = 0, chars = t.question.size();
    for (const auto& s : t.all_steps()) {
      f += s.failed;
      chars += s.thought.size() + render_tool_call(s.action).size() + s.observation.size();
    }
    const bool right = normalize_answer(*t.final_answer) == normalize_answer(gold.at(t.question));
    if (right && static_cast<std::int64_t>((chars + 3) / 4) <= cfg.max_tokens &&
        static_cast<double>(f) <= cfg.max_failed_fraction * static_cast<double>(t.step_count()))
      solvable.insert(t.question);
  }
  bool ok = ts.size() == 50 && dup == 0 && wrong == 0 && over == 0 && failing == 0 && questions == solvable;
  report("sft_filter", ok,
         std::to_string(out.size()) + " kept from 50 for " + std::to_string(solvable.size()) +
             " solvable questions; duplicates " + std::to_string(dup) + ", wrong " + std::to_string(wrong) +
             ", over-length " + std::to_string(over) + ", above failed-fraction " + std::to_string(failing));
}

void throughput() {
  WorldConfig wc;
  wc.base_documents = 10'000;
  World w = make_world(wc);
  Corpus c = inject_noise(w.corpus, make_distractors(w, 90'000, 3), 9.0);
  const std::size_t docs = c.size();
  auto idx = std::make_shared<const IndexSnapshot>(IndexSnapshot::build(std::move(c)));
  EnvService svc(idx, {});
  const int port = svc.start();

  std::vector<std::string> bodies;
  std::mt19937_64 rng(12);
  for (int i = 0; i < 512; ++i) {
    const auto& a = w.entity_labels[rng() % w.entity_labels.size()];
    const auto& b = w.entity_labels[rng() % w.entity_labels.size()];
    bodies.push_back(json{{"query", {a + " " + b}}, {"top_k", 10}}.dump());
  }
  const int threads = 4;
  const double window = 3.0;
  std::atomic<long> ok_count{0}, bad{0};
  auto t0 = Clock::now();
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) {
    pool.emplace_back([&, k] {
      httplib::Client cli("127.0.0.1", port);
      cli.set_keep_alive(true);
      cli.set_tcp_nodelay(true);
      std::size_t i = static_cast<std::size_t>(k) * 97;
      while (seconds_since(t0) < window) {
        auto res = cli.Post("/search", bodies[i++ % bodies.size()], "application/json");
        if (res && res->status == 200)
          ++ok_count;
        else
          ++bad;
      }
    });
  }
  for (auto& th : pool) th.join();
  const double secs = seconds_since(t0);
  svc.stop();
  const double rate = static_cast<double>(ok_count.load()) / secs;
  report("search_throughput", docs >= 100'000 && rate >= 500 && bad == 0,
         fmt("%.0f", rate) + " req/s over " + std::to_string(docs) + " docs, top_k 10, " + std::to_string(threads) +
             " keep-alive clients, " + std::to_string(bad.load()) + " errors, " +
             std::to_string(std::thread::hardware_concurrency()) + " hardware threads");
}

}  // namespace

int main() {
  guarded("treewidth_oracle_equivalence", treewidth_oracle);
  guarded("tree_decomposition_certification", decomposition_certification);
  guarded("msd_oracle_equivalence", msd_oracle);
  guarded("grpo_numerics", grpo_numerics);
  guarded("solvability_guarantee", solvability);
  guarded("dual_constraint_gate", dual_gate);
  guarded("interface_consistency", interface_consistency);
  guarded("context_management", context_management);
  guarded("sft_filter", sft_filter_check);
  guarded("search_throughput", throughput);
  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
