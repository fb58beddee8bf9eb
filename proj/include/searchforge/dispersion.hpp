// SPDX-License-Identifier: Apache-2.0
//
// Minimum Source Dispersion: the fewest documents whose union resolves every
// non-given node of a reasoning graph. A document resolves a node when it
// appears in that node's evidence set.
#pragma once

#include <set>
#include <vector>

#include "searchforge/graph.hpp"

namespace sf {

bool cover_check(const std::set<DocumentId>& docs, const ReasoningGraph& g);

struct MsdResult {
  int size = 0;
  std::vector<DocumentId> documents;  // one witness cover, sorted
};

/// Exhaustive search over document subsets in ascending size. The universe is
/// the union of evidence of the nodes that need covering. Throws
/// UniverseTooLarge or Uncoverable.
MsdResult minimum_source_dispersion(const ReasoningGraph& g, int doc_universe_limit = 20);
int msd_exact(const ReasoningGraph& g, int doc_universe_limit = 20);

/// Greedy set cover: most newly-covered nodes first, ties to the smallest id.
MsdResult greedy_source_dispersion(const ReasoningGraph& g);
int msd_greedy(const ReasoningGraph& g);

}  // namespace sf
