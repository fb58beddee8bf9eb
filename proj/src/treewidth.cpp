// SPDX-License-Identifier: Apache-2.0
#include "searchforge/treewidth.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>

#include "searchforge/error.hpp"

namespace sf {

std::string_view to_string(TdCondition c) {
  switch (c) {
    case TdCondition::NotATree: return "not a tree";
    case TdCondition::VertexUncovered: return "vertex uncovered";
    case TdCondition::EdgeUncovered: return "edge uncovered";
    case TdCondition::SubtreeDisconnected: return "subtree disconnected";
  }
  return "unknown";
}

int TreeDecomposition::width() const {
  std::size_t widest = 0;
  for (const auto& b : bags) widest = std::max(widest, b.size());
  return widest == 0 ? 0 : static_cast<int>(widest) - 1;
}

bool TdValidation::violates(TdCondition c) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const TdViolation& v) { return v.condition == c; });
}

namespace {

// Connected-component count of the tree restricted to `members`.
bool induced_connected(const std::vector<std::vector<int>>& adj, const std::vector<int>& members) {
  if (members.size() <= 1) return true;
  std::set<int> in(members.begin(), members.end());
  std::set<int> seen{members.front()};
  std::vector<int> stack{members.front()};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (in.count(w) && seen.insert(w).second) stack.push_back(w);
    }
  }
  return seen.size() == in.size();
}

}  // namespace

TdValidation validate_tree_decomposition(const UndirectedGraph& g, const TreeDecomposition& td) {
  for (const auto& bag : td.bags)
    for (const auto& v : bag)
      if (!g.index_of(v)) throw Error(ErrorCode::ForeignVertex, v);

  TdValidation out;
  out.width = td.width();
  const int m = static_cast<int>(td.bags.size());

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  bool tree_ok = true;
  for (const auto& [a, b] : td.tree_edges) {
    if (a < 0 || b < 0 || a >= m || b >= m || a == b) {
      tree_ok = false;
      continue;
    }
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  if (m > 0) {
    std::vector<int> all(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    if (static_cast<int>(td.tree_edges.size()) != m - 1 || !induced_connected(adj, all)) tree_ok = false;
  } else if (!td.tree_edges.empty()) {
    tree_ok = false;
  }
  if (!tree_ok)
    out.violations.push_back({TdCondition::NotATree, "tree edges do not form a spanning tree"});

  std::map<NodeId, std::vector<int>> holders;
  for (int i = 0; i < m; ++i)
    for (const auto& v : td.bags[static_cast<std::size_t>(i)]) holders[v].push_back(i);

  for (const auto& v : g.vertices())
    if (!holders.count(v)) out.violations.push_back({TdCondition::VertexUncovered, v});

  for (const auto& [a, b] : g.edges()) {
    const NodeId& na = g.name(a);
    const NodeId& nb = g.name(b);
    bool covered = std::any_of(td.bags.begin(), td.bags.end(),
                               [&](const auto& bag) { return bag.count(na) && bag.count(nb); });
    if (!covered) out.violations.push_back({TdCondition::EdgeUncovered, na + "-" + nb});
  }

  for (const auto& [v, members] : holders)
    if (!induced_connected(adj, members)) out.violations.push_back({TdCondition::SubtreeDisconnected, v});

  out.valid = out.violations.empty();
  return out;
}

namespace {

struct Elimination {
  int width = 0;
  TreeDecomposition td;
};

Elimination eliminate(const UndirectedGraph& g, const std::vector<int>& order) {
  const int n = g.size();
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) adj[static_cast<std::size_t>(v)] = g.neighbors(v);
  std::vector<int> position(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < static_cast<int>(order.size()); ++i) position[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;

  Elimination out;
  out.td.bags.resize(order.size());
  std::vector<int> parent(order.size(), -1);
  for (int i = 0; i < static_cast<int>(order.size()); ++i) {
    int v = order[static_cast<std::size_t>(i)];
    const auto nb = adj[static_cast<std::size_t>(v)];
    out.width = std::max(out.width, static_cast<int>(nb.size()));
    auto& bag = out.td.bags[static_cast<std::size_t>(i)];
    bag.insert(g.name(v));
    int next = -1;
    for (int w : nb) {
      bag.insert(g.name(w));
      int p = position[static_cast<std::size_t>(w)];
      if (next < 0 || p < next) next = p;
    }
    parent[static_cast<std::size_t>(i)] = next;
    for (int a : nb) {
      adj[static_cast<std::size_t>(a)].erase(v);
      for (int b : nb)
        if (a != b) adj[static_cast<std::size_t>(a)].insert(b);
    }
    adj[static_cast<std::size_t>(v)].clear();
  }
  // Roots of separate components are chained so the result is one tree.
  int previous_root = -1;
  for (int i = 0; i < static_cast<int>(order.size()); ++i) {
    if (parent[static_cast<std::size_t>(i)] >= 0) {
      out.td.tree_edges.emplace_back(i, parent[static_cast<std::size_t>(i)]);
    } else {
      if (previous_root >= 0) out.td.tree_edges.emplace_back(previous_root, i);
      previous_root = i;
    }
  }
  return out;
}

}  // namespace

TreeDecomposition decomposition_from_ordering(const UndirectedGraph& g, const std::vector<int>& order) {
  return eliminate(g, order).td;
}

int elimination_width(const UndirectedGraph& g, const std::vector<int>& order) {
  return eliminate(g, order).width;
}

TreewidthResult exact_treewidth(const UndirectedGraph& g, const ExactTreewidthOptions& opts) {
  const int n = g.size();
  if (n > opts.node_limit || n > 30)
    throw Error(ErrorCode::GraphTooLarge,
                std::to_string(n) + " vertices exceeds limit " + std::to_string(opts.node_limit));
  TreewidthResult result;
  if (n == 0) return result;

  const auto deadline = std::chrono::steady_clock::now() + opts.timeout;
  std::vector<std::uint32_t> adj(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int w : g.neighbors(v)) adj[static_cast<std::size_t>(v)] |= 1u << w;

  // dp[S] = best width of eliminating S first (in some order).
  // choice[S] = vertex of S eliminated last in that best order.
  const std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1u);
  const std::size_t states = std::size_t{1} << n;
  std::vector<std::uint8_t> dp(states, 0xff);
  std::vector<std::uint8_t> choice(states, 0);

  // Min-fill width is an upper bound; states at or above it cannot improve it.
  const int upper = minfill_treewidth(g).width;
  dp[0] = 0;

  auto q_size = [&](std::uint32_t s, int v) {
    // Vertices outside s + {v} reachable from v through s.
    std::uint32_t reach = adj[static_cast<std::size_t>(v)];
    std::uint32_t done = 1u << v;
    std::uint32_t todo = reach & s;
    while (todo) {
      int u = std::countr_zero(todo);
      todo &= todo - 1;
      done |= 1u << u;
      reach |= adj[static_cast<std::size_t>(u)];
      todo |= adj[static_cast<std::size_t>(u)] & s & ~done;
    }
    return std::popcount(reach & ~s & ~(1u << v));
  };

  for (std::uint32_t s = 1; s <= full && s != 0; ++s) {
    if ((s & 0xfffu) == 0 && std::chrono::steady_clock::now() > deadline)
      throw Error(ErrorCode::Timeout, "exact treewidth exceeded deadline");
    int best = 0xff;
    int best_v = -1;
    for (std::uint32_t rest = s; rest; rest &= rest - 1) {
      int v = std::countr_zero(rest);
      std::uint32_t prev = s & ~(1u << v);
      int w = dp[prev];
      if (w >= best || w > upper) continue;
      int q = q_size(prev, v);
      int cand = std::max(w, q);
      if (cand < best) {
        best = cand;
        best_v = v;
      }
    }
    if (best_v >= 0 && best <= upper) {
      dp[s] = static_cast<std::uint8_t>(best);
      choice[s] = static_cast<std::uint8_t>(best_v);
    }
    if (s == full) break;
  }

  std::vector<int> reversed;
  std::uint32_t s = full;
  if (dp[full] == 0xff) {
    // Cannot happen: the min-fill ordering itself is feasible at width `upper`.
    throw Error(ErrorCode::InvalidArgument, "treewidth dynamic program found no ordering");
  }
  while (s) {
    int v = choice[s];
    reversed.push_back(v);
    s &= ~(1u << v);
  }
  result.ordering.assign(reversed.rbegin(), reversed.rend());
  result.width = dp[full];
  result.decomposition = decomposition_from_ordering(g, result.ordering);
  return result;
}

int treewidth_exact(const UndirectedGraph& g, int node_limit) {
  ExactTreewidthOptions opts;
  opts.node_limit = node_limit;
  return exact_treewidth(g, opts).width;
}

TreewidthResult minfill_treewidth(const UndirectedGraph& g) {
  const int n = g.size();
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) adj[static_cast<std::size_t>(v)] = g.neighbors(v);
  std::vector<char> gone(static_cast<std::size_t>(n), 0);

  TreewidthResult result;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_fill = 0;
    for (int v = 0; v < n; ++v) {
      if (gone[static_cast<std::size_t>(v)]) continue;
      const auto& nb = adj[static_cast<std::size_t>(v)];
      long fill = 0;
      for (auto a = nb.begin(); a != nb.end(); ++a)
        for (auto b = std::next(a); b != nb.end(); ++b)
          if (!adj[static_cast<std::size_t>(*a)].count(*b)) ++fill;
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
      if (best_fill == 0) break;  // lowest index with zero fill wins
    }
    const auto nb = adj[static_cast<std::size_t>(best)];
    for (int a : nb) {
      adj[static_cast<std::size_t>(a)].erase(best);
      for (int b : nb)
        if (a != b) adj[static_cast<std::size_t>(a)].insert(b);
    }
    adj[static_cast<std::size_t>(best)].clear();
    gone[static_cast<std::size_t>(best)] = 1;
    result.ordering.push_back(best);
  }
  auto elim = eliminate(g, result.ordering);
  result.width = elim.width;
  result.decomposition = std::move(elim.td);
  return result;
}

int treewidth_upper_minfill(const UndirectedGraph& g) { return minfill_treewidth(g).width; }

}  // namespace sf
