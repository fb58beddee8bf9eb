// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic world: entity graphs, their evidence pages with
// encyclopedia-style urls, background pages, and distractor streams.
#pragma once

#include <cstdint>
#include <vector>

#include "searchforge/corpus.hpp"
#include "searchforge/graph.hpp"

namespace sf {

struct WorldConfig {
  std::uint64_t seed = 7;
  int graphs = 40;
  int nodes_per_graph = 24;
  /// Entity pages plus background pages.
  std::size_t base_documents = 10'000;
  /// Probability of a skip-two chord (i, i+3) on top of the strip.
  double chord_probability = 0.25;
  /// Probability of keeping each (i, i+2) edge of the strip.
  double strip_probability = 0.8;
  double given_probability = 0.2;
};

struct World {
  std::vector<ReasoningGraph> graphs;
  Corpus corpus;
  std::vector<std::string> entity_labels;
};

World make_world(const WorldConfig& cfg = {});

/// `count` distractor pages. A `confuser_fraction` share repeat an entity
/// label in a short page so they compete with its evidence page on title
/// searches; the rest are filler text.
std::vector<Document> make_distractors(const World& w, std::size_t count, std::uint64_t seed,
                                       double confuser_fraction = 0.2);

/// Chain a-b-c-d, four-cycle, and four-clique, each with one evidence page
/// per node.
std::vector<ReasoningGraph> reference_shapes();

}  // namespace sf
