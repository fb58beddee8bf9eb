// SPDX-License-Identifier: Apache-2.0
//
// Seed-page cascade: length band, structure and meta-page filters, optional
// concept classifier, and alias/redirect deduplication.
#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sf {

struct SeedPage {
  std::string title;
  std::string body;
  std::set<std::string> aliases;
  std::string ns;  // namespace, e.g. "Category"; empty for articles
  std::string url;
};

/// Returns true to keep an entity page, false for abstract concepts.
using ConceptFilter = std::function<bool(const SeedPage&)>;

struct SeedFilterConfig {
  std::size_t min_body_chars = 500;
  std::size_t max_body_chars = 50'000;
  std::vector<std::string> banned_title_patterns{"^list of ", "^index of ", "^glossary of "};
  std::vector<std::string> banned_namespaces{"Category:", "Template:", "Wikipedia:"};
  ConceptFilter concept_filter;
};

struct SeedFilterStats {
  std::size_t seen = 0;
  std::size_t malformed = 0;
  std::size_t too_short = 0;
  std::size_t too_long = 0;
  std::size_t structure = 0;
  std::size_t meta = 0;
  std::size_t concept_rejected = 0;
  std::size_t concept_failures = 0;  // plugin threw; page kept
  std::size_t duplicate = 0;
  std::size_t kept = 0;
};

/// Stateful so the alias closure spans the whole stream.
class SeedFilter {
 public:
  explicit SeedFilter(SeedFilterConfig cfg);

  bool accept(const SeedPage& page);
  void count_malformed() { ++stats_.seen; ++stats_.malformed; }
  const SeedFilterStats& stats() const { return stats_; }

 private:
  SeedFilterConfig cfg_;
  std::vector<std::regex> title_patterns_;
  std::set<std::string> seen_names_;
  SeedFilterStats stats_;
};

std::vector<SeedPage> filter_seeds(const std::vector<SeedPage>& pages, const SeedFilterConfig& cfg,
                                   SeedFilterStats* stats = nullptr);

/// JSONL in, JSONL out; malformed lines are counted and skipped.
SeedFilterStats filter_seeds_jsonl(std::istream& in, std::ostream& out, const SeedFilterConfig& cfg);

nlohmann::json seed_to_json(const SeedPage& p);
SeedPage seed_from_json(const nlohmann::json& j);

}  // namespace sf
