// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <functional>
#include <optional>

#include "oracles.hpp"
#include "searchforge/error.hpp"
#include "searchforge/graph.hpp"

namespace testutil {

inline std::string vname(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%02d", i);
  return buf;
}

inline sf::UndirectedGraph to_undirected(const oracle::SmallGraph& g) {
  std::vector<sf::NodeId> names;
  for (int i = 0; i < g.n; ++i) names.push_back(vname(i));
  sf::UndirectedGraph u(names);
  for (auto [a, b] : g.edges) u.add_edge(vname(a), vname(b));
  return u;
}

inline sf::UndirectedGraph undirected(int n, const std::vector<std::pair<int, int>>& edges) {
  return to_undirected(oracle::SmallGraph{n, edges});
}

inline sf::GraphNode node(const std::string& id, sf::NodeRole role = sf::NodeRole::Intermediate,
                          std::set<sf::DocumentId> evidence = {}, std::string label = {}) {
  sf::GraphNode n;
  n.id = id;
  n.label = label.empty() ? "Label " + id : label;
  n.role = role;
  n.evidence = std::move(evidence);
  return n;
}

// Code of the sf::Error thrown by `f`, nullopt when nothing (or something
// else) is thrown.
inline std::optional<sf::ErrorCode> error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const sf::Error& e) {
    return e.code();
  } catch (...) {
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace testutil
