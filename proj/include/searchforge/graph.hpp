// SPDX-License-Identifier: Apache-2.0
//
// Reasoning graphs: typed nodes with evidence links, a directed acyclic
// skeleton, and the undirected constraint view the complexity metrics use.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace sf {

using NodeId = std::string;
using DocumentId = std::string;

enum class NodeRole { Given, Intermediate, Answer };

std::string_view to_string(NodeRole role);
NodeRole parse_node_role(std::string_view text);

struct GraphNode {
  NodeId id;
  std::string label;
  NodeRole role = NodeRole::Intermediate;
  std::map<std::string, std::string> attributes;
  std::set<DocumentId> evidence;

  /// Attribute parsed as a number, if present and numeric.
  std::optional<double> numeric_attribute(const std::string& key) const;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  NodeId source;
  NodeId target;
  std::string relation;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
  friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

/// Simple undirected graph over named vertices. Vertex indices follow the
/// lexicographic order of the names so every algorithm on top of it breaks
/// ties by NodeId for free.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::vector<NodeId> vertices);

  /// Adds {a, b}; parallel edges collapse. Self-loops are ignored.
  void add_edge(const NodeId& a, const NodeId& b);
  void add_edge(int a, int b);
  void remove_edge(int a, int b);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<NodeId>& vertices() const { return names_; }
  const NodeId& name(int v) const { return names_[static_cast<std::size_t>(v)]; }
  std::optional<int> index_of(const NodeId& id) const;
  const std::set<int>& neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
  bool has_edge(int a, int b) const;
  std::size_t edge_count() const;
  /// Edges as index pairs (a < b), sorted.
  std::vector<std::pair<int, int>> edges() const;
  bool connected() const;

  friend bool operator==(const UndirectedGraph&, const UndirectedGraph&) = default;

 private:
  std::vector<NodeId> names_;
  std::vector<std::set<int>> adj_;
};

/// Immutable validated graph. Nodes are kept sorted by id and edges sorted and
/// deduplicated so structurally equal inputs produce equal values.
class ReasoningGraph {
 public:
  ReasoningGraph() = default;

  const std::string& id() const { return id_; }
  bool directed() const { return directed_; }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }

  const GraphNode* find(const NodeId& id) const;
  const GraphNode& node(const NodeId& id) const;  // throws UnknownNode
  bool contains(const NodeId& id) const { return find(id) != nullptr; }

  int out_degree(const NodeId& id) const;
  int in_degree(const NodeId& id) const;
  /// Degree in the constraint view (distinct neighbours).
  int degree(const NodeId& id) const;

  /// Kahn order with lexicographic tie-breaking; nullopt if cyclic.
  std::optional<std::vector<NodeId>> topological_order() const;

  /// Union of every node's evidence set.
  std::set<DocumentId> evidence_universe() const;

  ReasoningGraph with_id(std::string id) const;
  ReasoningGraph with_role(const NodeId& node, NodeRole role) const;
  ReasoningGraph with_evidence(const NodeId& node, std::set<DocumentId> docs) const;
  /// Edges are validated like build_graph does.
  ReasoningGraph with_edges_added(const std::vector<GraphEdge>& extra) const;
  /// Induced subgraph on `keep`; every source edge between kept nodes survives.
  ReasoningGraph induced(const std::set<NodeId>& keep) const;

  friend bool operator==(const ReasoningGraph&, const ReasoningGraph&) = default;

 private:
  friend ReasoningGraph build_graph(std::vector<GraphNode>, std::vector<GraphEdge>, bool,
                                    std::string);
  std::string id_;
  bool directed_ = true;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
};

/// Validates and canonicalizes. Throws DuplicateNode, DanglingEdge, SelfLoop
/// or CycleInDag (directed graphs only).
ReasoningGraph build_graph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                           bool directed, std::string id = {});

/// Every edge becomes one undirected edge; parallel and antiparallel edges
/// collapse.
UndirectedGraph constraint_view(const ReasoningGraph& g);

enum class ViolationKind { Disconnected, NoAnswerNode, UnevidencedIntermediate, UnevidencedAnswer, UnlabeledGiven };
std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  NodeId node;  // empty for graph-level violations
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
};

ValidationReport validate_task_subgraph(const ReasoningGraph& g);

/// Replaces the evidence set of `node`. Throws UnknownNode.
ReasoningGraph attach_evidence(const ReasoningGraph& g, const NodeId& node,
                               std::set<DocumentId> docs);

nlohmann::json graph_to_json(const ReasoningGraph& g);
ReasoningGraph graph_from_json(const nlohmann::json& j);
/// One JSON object per line, compact.
std::string graph_to_jsonl(const ReasoningGraph& g);

}  // namespace sf
