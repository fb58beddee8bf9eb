// SPDX-License-Identifier: Apache-2.0
#include "searchforge/graph.hpp"

#include <algorithm>
#include <charconv>
#include <queue>

#include "searchforge/error.hpp"

namespace sf {

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::Given: return "given";
    case NodeRole::Intermediate: return "intermediate";
    case NodeRole::Answer: return "answer";
  }
  return "intermediate";
}

NodeRole parse_node_role(std::string_view text) {
  if (text == "given" || text == "Given") return NodeRole::Given;
  if (text == "intermediate" || text == "Intermediate") return NodeRole::Intermediate;
  if (text == "answer" || text == "Answer") return NodeRole::Answer;
  throw Error(ErrorCode::InvalidArgument, "unknown node role '" + std::string(text) + "'");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Disconnected: return "disconnected";
    case ViolationKind::NoAnswerNode: return "no answer node";
    case ViolationKind::UnevidencedIntermediate: return "unevidenced intermediate";
    case ViolationKind::UnevidencedAnswer: return "unevidenced answer";
    case ViolationKind::UnlabeledGiven: return "unlabeled given";
  }
  return "unknown";
}

std::optional<double> GraphNode::numeric_attribute(const std::string& key) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return std::nullopt;
  const std::string& s = it->second;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// UndirectedGraph

UndirectedGraph::UndirectedGraph(std::vector<NodeId> vertices) : names_(std::move(vertices)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  adj_.resize(names_.size());
}

std::optional<int> UndirectedGraph::index_of(const NodeId& id) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), id);
  if (it == names_.end() || *it != id) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

void UndirectedGraph::add_edge(const NodeId& a, const NodeId& b) {
  auto ia = index_of(a);
  auto ib = index_of(b);
  if (!ia || !ib) throw Error(ErrorCode::UnknownNode, "edge {" + a + "," + b + "}");
  add_edge(*ia, *ib);
}

void UndirectedGraph::add_edge(int a, int b) {
  if (a == b) return;
  adj_[static_cast<std::size_t>(a)].insert(b);
  adj_[static_cast<std::size_t>(b)].insert(a);
}

void UndirectedGraph::remove_edge(int a, int b) {
  adj_[static_cast<std::size_t>(a)].erase(b);
  adj_[static_cast<std::size_t>(b)].erase(a);
}

bool UndirectedGraph::has_edge(int a, int b) const {
  return adj_[static_cast<std::size_t>(a)].count(b) > 0;
}

std::size_t UndirectedGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& n : adj_) total += n.size();
  return total / 2;
}

std::vector<std::pair<int, int>> UndirectedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < size(); ++a)
    for (int b : adj_[static_cast<std::size_t>(a)])
      if (a < b) out.emplace_back(a, b);
  return out;
}

bool UndirectedGraph::connected() const {
  if (names_.size() <= 1) return true;
  std::vector<char> seen(names_.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj_[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == names_.size();
}

// ---------------------------------------------------------------------------
// ReasoningGraph

namespace {

std::optional<std::vector<NodeId>> kahn(const std::vector<GraphNode>& nodes,
                                        const std::vector<GraphEdge>& edges) {
  std::map<NodeId, int> indeg;
  std::map<NodeId, std::vector<NodeId>> out;
  for (const auto& n : nodes) indeg[n.id] = 0;
  for (const auto& e : edges) {
    out[e.source].push_back(e.target);
    ++indeg[e.target];
  }
  std::set<NodeId> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.insert(id);
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (const auto& w : out[v])
      if (--indeg[w] == 0) ready.insert(w);
  }
  if (order.size() != nodes.size()) return std::nullopt;
  return order;
}

}  // namespace

ReasoningGraph build_graph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                           bool directed, std::string id) {
  std::sort(nodes.begin(), nodes.end(),
            [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i].id == nodes[i - 1].id) throw Error(ErrorCode::DuplicateNode, nodes[i].id);

  auto exists = [&](const NodeId& n) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), n,
                               [](const GraphNode& a, const NodeId& key) { return a.id < key; });
    return it != nodes.end() && it->id == n;
  };
  for (const auto& e : edges) {
    if (!exists(e.source)) throw Error(ErrorCode::DanglingEdge, e.source + " -> " + e.target);
    if (!exists(e.target)) throw Error(ErrorCode::DanglingEdge, e.source + " -> " + e.target);
    if (e.source == e.target) throw Error(ErrorCode::SelfLoop, e.source);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  if (directed && !kahn(nodes, edges)) throw Error(ErrorCode::CycleInDag, "directed edge set has a cycle");

  ReasoningGraph g;
  g.id_ = std::move(id);
  g.directed_ = directed;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  return g;
}

const GraphNode* ReasoningGraph::find(const NodeId& id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const GraphNode& n, const NodeId& key) { return n.id < key; });
  if (it == nodes_.end() || it->id != id) return nullptr;
  return &*it;
}

const GraphNode& ReasoningGraph::node(const NodeId& id) const {
  const GraphNode* n = find(id);
  if (!n) throw Error(ErrorCode::UnknownNode, id);
  return *n;
}

int ReasoningGraph::out_degree(const NodeId& id) const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                        [&](const GraphEdge& e) { return e.source == id; }));
}

int ReasoningGraph::in_degree(const NodeId& id) const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                        [&](const GraphEdge& e) { return e.target == id; }));
}

int ReasoningGraph::degree(const NodeId& id) const {
  std::set<NodeId> nb;
  for (const auto& e : edges_) {
    if (e.source == id) nb.insert(e.target);
    if (e.target == id) nb.insert(e.source);
  }
  return static_cast<int>(nb.size());
}

std::optional<std::vector<NodeId>> ReasoningGraph::topological_order() const {
  return kahn(nodes_, edges_);
}

std::set<DocumentId> ReasoningGraph::evidence_universe() const {
  std::set<DocumentId> out;
  for (const auto& n : nodes_) out.insert(n.evidence.begin(), n.evidence.end());
  return out;
}

ReasoningGraph ReasoningGraph::with_id(std::string id) const {
  ReasoningGraph g = *this;
  g.id_ = std::move(id);
  return g;
}

ReasoningGraph ReasoningGraph::with_role(const NodeId& node, NodeRole role) const {
  ReasoningGraph g = *this;
  auto it = std::find_if(g.nodes_.begin(), g.nodes_.end(), [&](const GraphNode& n) { return n.id == node; });
  if (it == g.nodes_.end()) throw Error(ErrorCode::UnknownNode, node);
  it->role = role;
  return g;
}

ReasoningGraph ReasoningGraph::with_evidence(const NodeId& node, std::set<DocumentId> docs) const {
  ReasoningGraph g = *this;
  auto it = std::find_if(g.nodes_.begin(), g.nodes_.end(), [&](const GraphNode& n) { return n.id == node; });
  if (it == g.nodes_.end()) throw Error(ErrorCode::UnknownNode, node);
  it->evidence = std::move(docs);
  return g;
}

ReasoningGraph ReasoningGraph::with_edges_added(const std::vector<GraphEdge>& extra) const {
  auto edges = edges_;
  edges.insert(edges.end(), extra.begin(), extra.end());
  return build_graph(nodes_, std::move(edges), directed_, id_);
}

ReasoningGraph ReasoningGraph::induced(const std::set<NodeId>& keep) const {
  std::vector<GraphNode> nodes;
  for (const auto& n : nodes_)
    if (keep.count(n.id)) nodes.push_back(n);
  std::vector<GraphEdge> edges;
  for (const auto& e : edges_)
    if (keep.count(e.source) && keep.count(e.target)) edges.push_back(e);
  return build_graph(std::move(nodes), std::move(edges), directed_, id_);
}

UndirectedGraph constraint_view(const ReasoningGraph& g) {
  std::vector<NodeId> ids;
  ids.reserve(g.size());
  for (const auto& n : g.nodes()) ids.push_back(n.id);
  UndirectedGraph u(std::move(ids));
  for (const auto& e : g.edges()) u.add_edge(e.source, e.target);
  return u;
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate_task_subgraph(const ReasoningGraph& g) {
  ValidationReport r;
  if (!constraint_view(g).connected()) r.violations.push_back({ViolationKind::Disconnected, {}});
  bool any_answer = false;
  for (const auto& n : g.nodes()) {
    switch (n.role) {
      case NodeRole::Answer:
        any_answer = true;
        if (n.evidence.empty()) r.violations.push_back({ViolationKind::UnevidencedAnswer, n.id});
        break;
      case NodeRole::Intermediate:
        if (n.evidence.empty()) r.violations.push_back({ViolationKind::UnevidencedIntermediate, n.id});
        break;
      case NodeRole::Given:
        if (n.label.empty()) r.violations.push_back({ViolationKind::UnlabeledGiven, n.id});
        break;
    }
  }
  if (!any_answer) r.violations.push_back({ViolationKind::NoAnswerNode, {}});
  return r;
}

ReasoningGraph attach_evidence(const ReasoningGraph& g, const NodeId& node, std::set<DocumentId> docs) {
  return g.with_evidence(node, std::move(docs));
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json graph_to_json(const ReasoningGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : g.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"label", n.label},
                     {"role", to_string(n.role)},
                     {"attributes", n.attributes},
                     {"evidence", n.evidence}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges())
    edges.push_back({{"source", e.source}, {"target", e.target}, {"relation", e.relation}});
  nlohmann::json j = {{"nodes", nodes}, {"edges", edges}, {"directed", g.directed()}};
  if (!g.id().empty()) j["id"] = g.id();
  return j;
}

ReasoningGraph graph_from_json(const nlohmann::json& j) {
  try {
    std::vector<GraphNode> nodes;
    for (const auto& jn : j.at("nodes")) {
      GraphNode n;
      n.id = jn.at("id").get<std::string>();
      n.label = jn.value("label", std::string{});
      n.role = parse_node_role(jn.value("role", std::string("intermediate")));
      if (jn.contains("attributes")) {
        for (const auto& [k, v] : jn.at("attributes").items())
          n.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      if (jn.contains("evidence"))
        for (const auto& d : jn.at("evidence")) n.evidence.insert(d.get<std::string>());
      nodes.push_back(std::move(n));
    }
    std::vector<GraphEdge> edges;
    for (const auto& je : j.at("edges")) {
      edges.push_back({je.at("source").get<std::string>(), je.at("target").get<std::string>(),
                       je.value("relation", std::string{})});
    }
    return build_graph(std::move(nodes), std::move(edges), j.value("directed", true),
                       j.value("id", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("graph json: ") + e.what());
  }
}

std::string graph_to_jsonl(const ReasoningGraph& g) { return graph_to_json(g).dump(); }

}  // namespace sf
