// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations for the tests. They share no code with the
// library: plain bitmasks, brute force, textbook formulas.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct SmallGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

inline SmallGraph random_graph(std::mt19937_64& rng, int max_n, double density_lo = 0.1, double density_hi = 0.9) {
  SmallGraph g;
  g.n = std::uniform_int_distribution<int>(1, max_n)(rng);
  double p = std::uniform_real_distribution<double>(density_lo, density_hi)(rng);
  std::bernoulli_distribution coin(p);
  for (int a = 0; a < g.n; ++a)
    for (int b = a + 1; b < g.n; ++b)
      if (coin(rng)) g.edges.push_back({a, b});
  return g;
}

// Width of one elimination ordering, simulated on adjacency bitmasks.
inline int ordering_width(int n, const std::vector<std::pair<int, int>>& edges, const std::vector<int>& order) {
  std::vector<std::uint32_t> adj(static_cast<std::size_t>(n), 0);
  for (auto [a, b] : edges) {
    adj[a] |= 1u << b;
    adj[b] |= 1u << a;
  }
  std::uint32_t alive = n >= 32 ? ~0u : ((1u << n) - 1);
  int width = 0;
  for (int v : order) {
    std::uint32_t nb = adj[v] & alive & ~(1u << v);
    width = std::max(width, __builtin_popcount(nb));
    for (int u = 0; u < n; ++u)
      if (nb >> u & 1u) adj[u] |= nb & ~(1u << u);
    alive &= ~(1u << v);
  }
  return width;
}

// Minimum over all n! orderings.
inline int brute_treewidth(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n == 0) return 0;
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  int best = n;
  do {
    best = std::min(best, ordering_width(n, edges, perm));
    if (best == 0) break;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Set cover by exhaustive subset scan. facts_of_doc[d] = facts document d
// resolves; every fact in [0, n_facts) must be covered. -1 when impossible.
inline int brute_min_cover(int n_facts, const std::vector<std::set<int>>& facts_of_doc) {
  const int m = static_cast<int>(facts_of_doc.size());
  int best = -1;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::set<int> covered;
    for (int d = 0; d < m; ++d)
      if (mask >> d & 1u) covered.insert(facts_of_doc[d].begin(), facts_of_doc[d].end());
    if (static_cast<int>(covered.size()) == n_facts) {
      int size = __builtin_popcount(mask);
      if (best < 0 || size < best) best = size;
    }
  }
  return best;
}

// Textbook BM25 with the floor-at-zero idf.
inline double bm25_idf(double n_docs, double df) { return std::max(0.0, std::log((n_docs - df + 0.5) / (df + 0.5))); }

inline double bm25_term(double tf, double doc_len, double avg_len, double idf, double k1 = 1.2, double b = 0.75) {
  return idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc_len / avg_len));
}

inline double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double population_std(const std::vector<double>& xs) {
  double m = mean(xs), s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace oracle
