// SPDX-License-Identifier: Apache-2.0
#include "searchforge/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

std::string_view to_string(AnswerRole r) { return r == AnswerRole::Hub ? "hub" : "deep_leaf"; }

AnswerRole parse_answer_role(std::string_view s) {
  if (s == "hub" || s == "Hub") return AnswerRole::Hub;
  if (s == "deep_leaf" || s == "DeepLeaf") return AnswerRole::DeepLeaf;
  throw Error(ErrorCode::ConfigInvalid, "unknown answer role '" + std::string(s) + "'");
}

bool leaks_answer(std::string_view question, std::string_view answer) {
  return normalized_contains(question, answer);
}

nlohmann::json task_to_json(const TaskSpec& t) {
  nlohmann::json inj = nlohmann::json::array();
  for (const auto& c : t.injected_constraints)
    inj.push_back({{"node", c.node}, {"rule_name", c.rule_name}, {"rendered_clause", c.rendered_clause}});
  return {{"id", t.id},
          {"subgraph", graph_to_json(t.subgraph)},
          {"answer_node", t.answer_node},
          {"answer_text", t.answer_text},
          {"question_text", t.question_text},
          {"answer_role", to_string(t.answer_role)},
          {"injected_constraints", inj},
          {"injection_noop", t.injection_noop},
          {"complexity", t.complexity ? complexity_to_json(*t.complexity) : nlohmann::json()},
          {"provenance", {{"source_graph", t.provenance.source_graph}, {"sample_index", t.provenance.sample_index}}}};
}

TaskSpec task_from_json(const nlohmann::json& j) {
  try {
    TaskSpec t;
    t.id = j.at("id").get<std::string>();
    t.subgraph = graph_from_json(j.at("subgraph"));
    t.answer_node = j.at("answer_node").get<std::string>();
    t.answer_text = j.at("answer_text").get<std::string>();
    t.question_text = j.at("question_text").get<std::string>();
    t.answer_role = parse_answer_role(j.value("answer_role", std::string("deep_leaf")));
    if (j.contains("injected_constraints"))
      for (const auto& c : j["injected_constraints"])
        t.injected_constraints.push_back({c.at("node").get<std::string>(), c.at("rule_name").get<std::string>(),
                                          c.at("rendered_clause").get<std::string>()});
    t.injection_noop = j.value("injection_noop", false);
    if (j.contains("complexity") && !j["complexity"].is_null()) t.complexity = complexity_from_json(j["complexity"]);
    if (j.contains("provenance")) {
      t.provenance.source_graph = j["provenance"].value("source_graph", std::string{});
      t.provenance.sample_index = j["provenance"].value("sample_index", 0);
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("task json: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Enrichment

namespace {

bool adjacent(const std::set<std::pair<NodeId, NodeId>>& pairs, const NodeId& a, const NodeId& b) {
  return pairs.count({std::min(a, b), std::max(a, b)}) > 0;
}

}  // namespace

EnrichmentResult enrich_topology(const ReasoningGraph& g, const EnrichmentRules& rules,
                                 const GraphAgentPlugin& plugin) {
  EnrichmentResult out;
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& e : g.edges()) pairs.insert({std::min(e.source, e.target), std::max(e.source, e.target)});

  std::map<NodeId, std::size_t> rank;
  if (g.directed()) {
    auto order = g.topological_order();
    for (std::size_t i = 0; i < order->size(); ++i) rank[(*order)[i]] = i;
  } else {
    for (std::size_t i = 0; i < g.nodes().size(); ++i) rank[g.nodes()[i].id] = i;
  }
  auto oriented = [&](const NodeId& a, const NodeId& b, std::string relation) {
    return rank[a] < rank[b] ? GraphEdge{a, b, std::move(relation)} : GraphEdge{b, a, std::move(relation)};
  };

  const auto& nodes = g.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const auto& a = nodes[i];
      const auto& b = nodes[j];
      if (adjacent(pairs, a.id, b.id)) continue;
      std::optional<std::string> relation;
      if (rules.shared_evidence) {
        bool shared = std::any_of(a.evidence.begin(), a.evidence.end(),
                                  [&](const DocumentId& d) { return b.evidence.count(d) > 0; });
        if (shared) relation = "co_documented";
      }
      if (!relation) {
        for (const auto& key : rules.equal_attributes) {
          auto ia = a.attributes.find(key);
          auto ib = b.attributes.find(key);
          if (ia != a.attributes.end() && ib != b.attributes.end() && ia->second == ib->second) {
            relation = "shares_attribute";
            break;
          }
        }
      }
      if (relation) {
        out.added.push_back(oriented(a.id, b.id, *relation));
        pairs.insert({a.id, b.id});
      }
    }
  }
  out.graph = out.added.empty() ? g : g.with_edges_added(out.added);

  if (plugin) {
    std::vector<GraphEdge> proposed;
    try {
      proposed = plugin(out.graph);
    } catch (const std::exception& e) {
      out.plugin_error = std::string("PluginFailure: ") + e.what();
    }
    for (const auto& e : proposed) {
      if (!out.graph.contains(e.source) || !out.graph.contains(e.target)) {
        out.rejected.push_back({e, "dangling endpoint"});
        continue;
      }
      if (e.source == e.target) {
        out.rejected.push_back({e, "self-loop"});
        continue;
      }
      if (adjacent(pairs, e.source, e.target)) {
        out.rejected.push_back({e, "already adjacent"});
        continue;
      }
      try {
        out.graph = out.graph.with_edges_added({e});
      } catch (const Error& err) {
        out.rejected.push_back({e, std::string(to_string(err.code()))});
        continue;
      }
      pairs.insert({std::min(e.source, e.target), std::max(e.source, e.target)});
      out.added.push_back(e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<ReasoningGraph> sample_subgraphs(const ReasoningGraph& g, int count, int size_min, int size_max,
                                             std::uint64_t seed) {
  const int n = static_cast<int>(g.size());
  if (size_min < 2 || size_max < size_min || size_max > n)
    throw Error(ErrorCode::SizeRangeInfeasible, "size range [" + std::to_string(size_min) + "," +
                                                    std::to_string(size_max) + "] on " + std::to_string(n) +
                                                    " nodes");
  const UndirectedGraph view = constraint_view(g);
  std::mt19937_64 rng(seed);
  std::vector<ReasoningGraph> out;
  std::set<std::set<NodeId>> seen;
  const int attempts = std::max(64, count * 32);
  for (int attempt = 0; attempt < attempts && static_cast<int>(out.size()) < count; ++attempt) {
    const int target = size_min + static_cast<int>(rng() % static_cast<std::uint64_t>(size_max - size_min + 1));
    std::set<int> chosen{static_cast<int>(rng() % static_cast<std::uint64_t>(n))};
    while (static_cast<int>(chosen.size()) < target) {
      std::set<int> frontier;
      for (int v : chosen)
        for (int w : view.neighbors(v))
          if (!chosen.count(w)) frontier.insert(w);
      if (frontier.empty()) break;
      auto it = frontier.begin();
      std::advance(it, static_cast<long>(rng() % frontier.size()));
      chosen.insert(*it);
    }
    if (static_cast<int>(chosen.size()) < size_min) continue;
    std::set<NodeId> names;
    for (int v : chosen) names.insert(view.name(v));
    if (!seen.insert(names).second) continue;
    out.push_back(g.induced(names).with_id(g.id() + "#s" + std::to_string(out.size())));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Answer selection

AnswerSelection select_answer_node(const ReasoningGraph& g, AnswerRole role) {
  std::optional<NodeId> pick;
  if (role == AnswerRole::Hub) {
    int best = -1;
    for (const auto& n : g.nodes()) {  // nodes are sorted, so '>' keeps the smallest id on ties
      if (n.role == NodeRole::Given) continue;
      int d = g.degree(n.id);
      if (d > best) {
        best = d;
        pick = n.id;
      }
    }
  } else {
    std::map<NodeId, int> depth;
    for (const auto& n : g.nodes()) depth[n.id] = -1;
    bool any_given = std::any_of(g.nodes().begin(), g.nodes().end(),
                                 [](const GraphNode& n) { return n.role == NodeRole::Given; });
    std::map<NodeId, std::vector<NodeId>> out_edges;
    for (const auto& e : g.edges()) out_edges[e.source].push_back(e.target);

    std::set<NodeId> sinks;
    if (g.directed()) {
      for (const auto& n : g.nodes()) {
        if (any_given ? n.role == NodeRole::Given : g.in_degree(n.id) == 0) depth[n.id] = 0;
        if (g.out_degree(n.id) == 0) sinks.insert(n.id);
      }
      const auto topo = g.topological_order();
      for (const auto& v : *topo) {
        if (depth[v] < 0) continue;
        for (const auto& w : out_edges[v]) depth[w] = std::max(depth[w], depth[v] + 1);
      }
    } else {
      // Undirected graphs have no sinks; use leaves and BFS distance instead.
      const UndirectedGraph view = constraint_view(g);
      std::vector<int> frontier;
      for (int v = 0; v < view.size(); ++v) {
        const auto& n = g.node(view.name(v));
        if (any_given ? n.role == NodeRole::Given : v == 0) {
          depth[n.id] = 0;
          frontier.push_back(v);
        }
        if (view.neighbors(v).size() <= 1) sinks.insert(n.id);
      }
      while (!frontier.empty()) {
        std::vector<int> next;
        for (int v : frontier)
          for (int w : view.neighbors(v))
            if (depth[view.name(w)] < 0) {
              depth[view.name(w)] = depth[view.name(v)] + 1;
              next.push_back(w);
            }
        frontier = std::move(next);
      }
    }
    int best = -1;
    for (const auto& id : sinks) {
      if (g.node(id).role == NodeRole::Given) continue;
      if (depth[id] > best) {
        best = depth[id];
        pick = id;
      }
    }
  }
  if (!pick) throw Error(ErrorCode::NoEligibleNode, std::string("no eligible ") + std::string(to_string(role)) + " node");

  ReasoningGraph out = g;
  for (const auto& n : g.nodes())
    if (n.role == NodeRole::Answer && n.id != *pick) out = out.with_role(n.id, NodeRole::Intermediate);
  out = out.with_role(*pick, NodeRole::Answer);
  return {*pick, std::move(out)};
}

// ---------------------------------------------------------------------------
// Rendering

TemplateLibrary TemplateLibrary::defaults() {
  TemplateLibrary lib;
  lib.templates = {
      {"located_in", "{source} is located in {target}"},
      {"founded_by", "{source} was founded by {target}"},
      {"member_of", "{source} is a member of {target}"},
      {"born_in", "{source} was born in {target}"},
      {"authored", "{source} wrote {target}"},
      {"collaborated_with", "{source} collaborated with {target}"},
      {"studied_at", "{source} studied at {target}"},
      {"works_at", "{source} works at {target}"},
      {"named_after", "{source} is named after {target}"},
      {"directed", "{source} directed {target}"},
      {"starred_in", "{source} appeared in {target}"},
      {"co_documented", "{source} and {target} are described in a common source"},
      {"shares_attribute", "{source} shares a recorded attribute with {target}"},
  };
  return lib;
}

TemplateLibrary TemplateLibrary::from_json(const nlohmann::json& j) {
  TemplateLibrary lib;
  if (j.contains("templates"))
    for (const auto& [k, v] : j["templates"].items()) lib.templates[k] = v.get<std::string>();
  if (j.contains("fallback") && !j["fallback"].is_null()) lib.fallback = j["fallback"].get<std::string>();
  lib.answer_placeholder = j.value("answer_placeholder", lib.answer_placeholder);
  lib.prefix = j.value("prefix", lib.prefix);
  lib.joiner = j.value("joiner", lib.joiner);
  lib.suffix = j.value("suffix", lib.suffix);
  return lib;
}

nlohmann::json TemplateLibrary::to_json() const {
  return {{"templates", templates},
          {"fallback", fallback ? nlohmann::json(*fallback) : nlohmann::json()},
          {"answer_placeholder", answer_placeholder},
          {"prefix", prefix},
          {"joiner", joiner},
          {"suffix", suffix}};
}

std::string render_question(const ReasoningGraph& g, const NodeId& answer, const TemplateLibrary& lib,
                            const QuestionGenerator& plugin) {
  const GraphNode& ans = g.node(answer);
  if (trim(ans.label).empty()) throw Error(ErrorCode::InvalidArgument, "answer node '" + answer + "' has no label");
  if (plugin) {
    std::optional<std::string> generated;
    try {
      generated = plugin(g, answer);
    } catch (const std::exception&) {
    }
    if (generated) {
      if (leaks_answer(*generated, ans.label))
        throw Error(ErrorCode::AnswerLeakage, "generated question mentions the answer");
      return *generated;
    }
  }
  auto mention = [&](const NodeId& id) {
    return id == answer ? lib.answer_placeholder : g.node(id).label;
  };
  std::vector<std::string> clauses;
  for (const auto& e : g.edges()) {
    auto it = lib.templates.find(e.relation);
    std::string tmpl;
    if (it != lib.templates.end()) {
      tmpl = it->second;
    } else if (lib.fallback) {
      tmpl = *lib.fallback;
    } else {
      throw Error(ErrorCode::MissingTemplate, "relation '" + e.relation + "'");
    }
    clauses.push_back(fill_template(tmpl, {{"source", mention(e.source)},
                                           {"target", mention(e.target)},
                                           {"relation", e.relation}}));
  }
  std::string q = fill_template(lib.prefix, {{"answer", lib.answer_placeholder}});
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) q += lib.joiner;
    q += clauses[i];
  }
  q += lib.suffix;
  if (leaks_answer(q, ans.label)) throw Error(ErrorCode::AnswerLeakage, "rendered question mentions the answer");
  return q;
}

// ---------------------------------------------------------------------------
// Injection

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0;
  constexpr double kRad = M_PI / 180.0;
  const double dlat = (lat2 - lat1) * kRad;
  const double dlon = (lon2 - lon1) * kRad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * kEarthRadiusKm * std::atan2(std::sqrt(a), std::sqrt(1 - a));
}

double bearing_deg(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kRad = M_PI / 180.0;
  const double y = std::sin((lon2 - lon1) * kRad) * std::cos(lat2 * kRad);
  const double x = std::cos(lat1 * kRad) * std::sin(lat2 * kRad) -
                   std::sin(lat1 * kRad) * std::cos(lat2 * kRad) * std::cos((lon2 - lon1) * kRad);
  double b = std::atan2(y, x) / kRad;
  return b < 0 ? b + 360.0 : b;
}

std::string compass_direction(double bearing) {
  static const char* kNames[] = {"north", "northeast", "east", "southeast",
                                 "south", "southwest", "west", "northwest"};
  int idx = static_cast<int>(std::floor(std::fmod(bearing + 22.5, 360.0) / 45.0));
  return kNames[idx % 8];
}

std::string drive_duration_phrase(double hours) {
  static const char* kWords[] = {"zero", "one", "two", "three", "four", "five", "six",
                                 "seven", "eight", "nine", "ten", "eleven", "twelve"};
  long h = std::max(1L, std::lround(hours));
  std::string n = h <= 12 ? kWords[h] : std::to_string(h);
  return n + (h == 1 ? " hour's" : " hours'");
}

long long approximate_count(double value) {
  if (value <= 0) return 0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(value)) - 1);
  return static_cast<long long>(std::llround(value / magnitude) * magnitude);
}

InjectionRuleSet InjectionRuleSet::defaults() {
  InjectionRuleSet set;
  InjectionRule map;
  map.name = "map_distance";
  map.kind = InjectionKind::MapDistance;
  map.clause_template = "the city about {duration} drive {direction} of {anchor}";
  InjectionRule cite;
  cite.name = "citation_interval";
  cite.kind = InjectionKind::CitationInterval;
  cite.clause_template = "the scholar with approximately {approx} citations";
  set.rules = {map, cite};
  return set;
}

namespace {

InjectionKind parse_kind(const std::string& s) {
  if (s == "map_distance") return InjectionKind::MapDistance;
  if (s == "citation_interval") return InjectionKind::CitationInterval;
  if (s == "attribute_clause") return InjectionKind::AttributeClause;
  throw Error(ErrorCode::ConfigInvalid, "unknown injection kind '" + s + "'");
}

std::string kind_name(InjectionKind k) {
  switch (k) {
    case InjectionKind::MapDistance: return "map_distance";
    case InjectionKind::CitationInterval: return "citation_interval";
    case InjectionKind::AttributeClause: return "attribute_clause";
  }
  return "attribute_clause";
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80; }

// Positions where `label` occurs as a whole word sequence.
std::vector<std::size_t> mention_positions(const std::string& text, const std::string& label) {
  std::vector<std::size_t> out;
  if (label.empty()) return out;
  std::size_t pos = 0;
  while ((pos = text.find(label, pos)) != std::string::npos) {
    bool left = pos == 0 || !is_word_char(text[pos - 1]);
    std::size_t end = pos + label.size();
    bool right = end >= text.size() || !is_word_char(text[end]);
    if (left && right) out.push_back(pos);
    pos = end;
  }
  return out;
}

std::string replace_mentions(const std::string& text, const std::string& label, const std::string& clause) {
  auto positions = mention_positions(text, label);
  std::string out;
  std::size_t last = 0;
  for (std::size_t p : positions) {
    out.append(text, last, p - last);
    out += clause;
    last = p + label.size();
  }
  out.append(text, last, std::string::npos);
  return out;
}

std::string format_number(double v) {
  if (std::fabs(v - std::round(v)) < 1e-9) return std::to_string(static_cast<long long>(std::llround(v)));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

InjectionRuleSet InjectionRuleSet::from_json(const nlohmann::json& j) {
  InjectionRuleSet set;
  for (const auto& jr : j.at("rules")) {
    InjectionRule r;
    r.name = jr.at("name").get<std::string>();
    r.kind = parse_kind(jr.at("kind").get<std::string>());
    r.clause_template = jr.at("template").get<std::string>();
    if (jr.contains("requires"))
      for (const auto& a : jr["requires"]) r.required_attributes.push_back(a.get<std::string>());
    r.lat_key = jr.value("lat_key", r.lat_key);
    r.lon_key = jr.value("lon_key", r.lon_key);
    r.citations_key = jr.value("citations_key", r.citations_key);
    r.speed_kmh = jr.value("speed_kmh", r.speed_kmh);
    set.rules.push_back(std::move(r));
  }
  return set;
}

nlohmann::json InjectionRuleSet::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rules)
    rs.push_back({{"name", r.name},
                  {"kind", kind_name(r.kind)},
                  {"template", r.clause_template},
                  {"requires", r.required_attributes},
                  {"lat_key", r.lat_key},
                  {"lon_key", r.lon_key},
                  {"citations_key", r.citations_key},
                  {"speed_kmh", r.speed_kmh}});
  return {{"rules", rs}};
}

TaskSpec inject_tool_constraints(const TaskSpec& task, const InjectionRuleSet& rules) {
  TaskSpec out = task;
  const ReasoningGraph& g = task.subgraph;
  std::set<NodeId> replaced;
  std::set<NodeId> anchors;

  for (const auto& n : g.nodes()) {
    if (n.id == task.answer_node || anchors.count(n.id)) continue;
    if (mention_positions(out.question_text, n.label).empty()) continue;
    for (const auto& rule : rules.rules) {
      std::optional<std::string> clause;
      std::optional<NodeId> anchor_used;
      switch (rule.kind) {
        case InjectionKind::MapDistance: {
          auto lat = n.numeric_attribute(rule.lat_key);
          auto lon = n.numeric_attribute(rule.lon_key);
          if (!lat || !lon) break;
          for (const auto& a : g.nodes()) {
            if (a.id == n.id || a.id == task.answer_node || replaced.count(a.id)) continue;
            auto alat = a.numeric_attribute(rule.lat_key);
            auto alon = a.numeric_attribute(rule.lon_key);
            if (!alat || !alon || mention_positions(out.question_text, a.label).empty()) continue;
            const double km = haversine_km(*alat, *alon, *lat, *lon);
            const std::string direction = compass_direction(bearing_deg(*alat, *alon, *lat, *lon));
            clause = fill_template(rule.clause_template,
                                   {{"duration", drive_duration_phrase(km / rule.speed_kmh)},
                                    {"hours", std::to_string(std::max(1L, std::lround(km / rule.speed_kmh)))},
                                    {"km", std::to_string(std::lround(km))},
                                    {"direction", direction},
                                    {"anchor", a.label}});
            anchor_used = a.id;
            break;
          }
          break;
        }
        case InjectionKind::CitationInterval: {
          auto c = n.numeric_attribute(rule.citations_key);
          if (!c) break;
          clause = fill_template(rule.clause_template,
                                 {{"approx", std::to_string(approximate_count(*c))},
                                  {"low", std::to_string(static_cast<long long>(std::floor(*c * 0.9)))},
                                  {"high", std::to_string(static_cast<long long>(std::ceil(*c * 1.1)))}});
          break;
        }
        case InjectionKind::AttributeClause: {
          if (rule.required_attributes.empty()) break;
          std::vector<std::pair<std::string, std::string>> slots;
          bool ok = true;
          for (const auto& key : rule.required_attributes) {
            auto it = n.attributes.find(key);
            if (it == n.attributes.end()) {
              ok = false;
              break;
            }
            auto num = n.numeric_attribute(key);
            slots.emplace_back(key, num ? format_number(*num) : it->second);
          }
          if (ok) clause = fill_template(rule.clause_template, slots);
          break;
        }
      }
      if (!clause) continue;
      std::string rewritten = replace_mentions(out.question_text, n.label, *clause);
      if (leaks_answer(rewritten, task.answer_text)) continue;
      out.question_text = std::move(rewritten);
      out.injected_constraints.push_back({n.id, rule.name, *clause});
      replaced.insert(n.id);
      if (anchor_used) anchors.insert(*anchor_used);
      break;
    }
  }
  out.injection_noop = out.injected_constraints.size() == task.injected_constraints.size();
  return out;
}

// ---------------------------------------------------------------------------
// Gate

GateDecision dual_constrained_accept(const TaskSpec& task, int k_min, int k_max, int msd_min) {
  if (!task.complexity) throw Error(ErrorCode::MissingComplexityReport, "task '" + task.id + "'");
  const ComplexityReport& r = *task.complexity;
  GateDecision d;
  int k = r.treewidth_upper;
  if (r.treewidth_exact) {
    k = *r.treewidth_exact;
  } else {
    d.used_treewidth_upper = true;
  }
  std::optional<int> msd = r.msd;
  if (!msd && r.msd_upper) {
    msd = r.msd_upper;
    d.used_msd_upper = true;
  }
  d.accepted = k_min <= k && k <= k_max && msd && *msd >= msd_min;
  return d;
}

// ---------------------------------------------------------------------------
// Driver

std::vector<TaskSpec> synthesize(const std::vector<ReasoningGraph>& graphs, const SynthesisConfig& cfg,
                                 SynthesisStats* stats, const SynthesisPlugins& plugins) {
  SynthesisStats st;
  std::vector<TaskSpec> out;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const ReasoningGraph& master = graphs[gi];
    ++st.graphs;
    std::string gid = master.id().empty() ? "g" + std::to_string(gi) : master.id();
    EnrichmentResult enriched = enrich_topology(master.with_id(gid), cfg.enrichment, plugins.graph_agent);
    if (enriched.plugin_error) ++st.enrichment_plugin_errors;
    const ReasoningGraph& g = enriched.graph;
    if (static_cast<int>(g.size()) < cfg.size_min) continue;
    const int size_max = std::min<int>(cfg.size_max, static_cast<int>(g.size()));
    const std::uint64_t seed = cfg.seed ^ fnv1a64(gid);
    auto samples = sample_subgraphs(g, cfg.subgraphs_per_graph, cfg.size_min, size_max, seed);
    st.subgraphs += samples.size();

    std::set<std::pair<std::set<NodeId>, NodeId>> emitted_keys;
    for (std::size_t si = 0; si < samples.size(); ++si) {
      for (AnswerRole role : cfg.roles) {
        ++st.candidates;
        AnswerSelection sel;
        try {
          sel = select_answer_node(samples[si], role);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoEligibleNode) throw;
          ++st.no_answer;
          continue;
        }
        std::set<NodeId> key_nodes;
        for (const auto& n : sel.graph.nodes()) key_nodes.insert(n.id);
        if (!emitted_keys.insert({key_nodes, sel.node}).second) {
          ++st.duplicates;
          continue;
        }
        if (!validate_task_subgraph(sel.graph).ok()) {
          ++st.invalid;
          continue;
        }
        TaskSpec task;
        task.id = gid + "-s" + std::to_string(si) + "-" + std::string(to_string(role));
        task.subgraph = sel.graph.with_id(task.id);
        task.answer_node = sel.node;
        task.answer_text = sel.graph.node(sel.node).label;
        task.answer_role = role;
        task.provenance = {gid, static_cast<int>(si)};
        task.complexity = compute_complexity(task.subgraph, cfg.complexity);
        GateDecision gate = dual_constrained_accept(task, cfg.k_min, cfg.k_max, cfg.msd_min);
        if (!gate.accepted || (cfg.require_exact && (gate.used_treewidth_upper || gate.used_msd_upper))) {
          ++st.gate_rejected;
          continue;
        }
        try {
          task.question_text = render_question(task.subgraph, task.answer_node, cfg.templates,
                                               plugins.question_generator);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::MissingTemplate && e.code() != ErrorCode::AnswerLeakage) throw;
          ++st.render_rejected;
          continue;
        }
        task = inject_tool_constraints(task, cfg.injection);
        ++st.emitted;
        out.push_back(std::move(task));
      }
    }
  }
  if (stats) *stats = st;
  return out;
}

}  // namespace sf
