// SPDX-License-Identifier: Apache-2.0
#include "searchforge/dispersion.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

#include "searchforge/error.hpp"

namespace sf {

bool cover_check(const std::set<DocumentId>& docs, const ReasoningGraph& g) {
  for (const auto& n : g.nodes()) {
    if (n.role == NodeRole::Given) continue;
    bool hit = std::any_of(n.evidence.begin(), n.evidence.end(),
                           [&](const DocumentId& d) { return docs.count(d) > 0; });
    if (!hit) return false;
  }
  return true;
}

namespace {

struct CoverInstance {
  std::vector<DocumentId> universe;          // sorted
  std::vector<std::vector<int>> node_docs;   // per node needing cover: doc indices
};

CoverInstance make_instance(const ReasoningGraph& g) {
  CoverInstance inst;
  std::set<DocumentId> u;
  for (const auto& n : g.nodes()) {
    if (n.role == NodeRole::Given) continue;
    if (n.evidence.empty()) throw Error(ErrorCode::Uncoverable, "node '" + n.id + "' has no evidence");
    u.insert(n.evidence.begin(), n.evidence.end());
  }
  inst.universe.assign(u.begin(), u.end());
  for (const auto& n : g.nodes()) {
    if (n.role == NodeRole::Given) continue;
    std::vector<int> idx;
    for (const auto& d : n.evidence) {
      auto it = std::lower_bound(inst.universe.begin(), inst.universe.end(), d);
      idx.push_back(static_cast<int>(it - inst.universe.begin()));
    }
    inst.node_docs.push_back(std::move(idx));
  }
  return inst;
}

}  // namespace

MsdResult minimum_source_dispersion(const ReasoningGraph& g, int doc_universe_limit) {
  CoverInstance inst = make_instance(g);
  const int m = static_cast<int>(inst.universe.size());
  if (m > doc_universe_limit || m > 30)
    throw Error(ErrorCode::UniverseTooLarge,
                std::to_string(m) + " documents exceeds limit " + std::to_string(doc_universe_limit));
  MsdResult out;
  if (inst.node_docs.empty()) return out;

  std::vector<std::uint32_t> masks;
  for (const auto& docs : inst.node_docs) {
    std::uint32_t mask = 0;
    for (int d : docs) mask |= 1u << d;
    masks.push_back(mask);
  }
  auto covers = [&](std::uint32_t s) {
    return std::all_of(masks.begin(), masks.end(), [&](std::uint32_t mk) { return (mk & s) != 0; });
  };

  for (int k = 1; k <= m; ++k) {
    // Gosper's hack: all k-subsets of m bits in increasing numeric order.
    std::uint32_t s = (1u << k) - 1u;
    const std::uint32_t limit = 1u << m;
    while (s < limit) {
      if (covers(s)) {
        out.size = k;
        for (std::uint32_t rest = s; rest; rest &= rest - 1)
          out.documents.push_back(inst.universe[static_cast<std::size_t>(std::countr_zero(rest))]);
        return out;
      }
      std::uint32_t c = s & (~s + 1u);
      std::uint32_t r = s + c;
      s = (((r ^ s) >> 2) / c) | r;
    }
  }
  // Unreachable: the full universe covers every node with non-empty evidence.
  throw Error(ErrorCode::Uncoverable, "no cover found");
}

int msd_exact(const ReasoningGraph& g, int doc_universe_limit) {
  return minimum_source_dispersion(g, doc_universe_limit).size;
}

MsdResult greedy_source_dispersion(const ReasoningGraph& g) {
  CoverInstance inst = make_instance(g);
  const std::size_t m = inst.universe.size();
  std::vector<std::vector<int>> doc_nodes(m);
  for (std::size_t i = 0; i < inst.node_docs.size(); ++i)
    for (int d : inst.node_docs[i]) doc_nodes[static_cast<std::size_t>(d)].push_back(static_cast<int>(i));

  std::vector<char> covered(inst.node_docs.size(), 0);
  std::size_t remaining = inst.node_docs.size();
  MsdResult out;
  while (remaining > 0) {
    std::size_t best = m;
    int best_gain = 0;
    for (std::size_t d = 0; d < m; ++d) {
      int gain = 0;
      for (int node : doc_nodes[d]) gain += covered[static_cast<std::size_t>(node)] ? 0 : 1;
      if (gain > best_gain) {
        best_gain = gain;
        best = d;
      }
    }
    for (int node : doc_nodes[best]) {
      if (!covered[static_cast<std::size_t>(node)]) {
        covered[static_cast<std::size_t>(node)] = 1;
        --remaining;
      }
    }
    out.documents.push_back(inst.universe[best]);
  }
  out.size = static_cast<int>(out.documents.size());
  std::sort(out.documents.begin(), out.documents.end());
  return out;
}

int msd_greedy(const ReasoningGraph& g) { return greedy_source_dispersion(g).size; }

}  // namespace sf
