// SPDX-License-Identifier: Apache-2.0
#include "searchforge/seeds.hpp"

#include <istream>
#include <ostream>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

SeedFilter::SeedFilter(SeedFilterConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.min_body_chars >= cfg_.max_body_chars)
    throw Error(ErrorCode::ConfigInvalid, "min_body_chars must be below max_body_chars");
  for (const auto& p : cfg_.banned_title_patterns)
    title_patterns_.emplace_back(p, std::regex::icase | std::regex::ECMAScript);
}

bool SeedFilter::accept(const SeedPage& page) {
  ++stats_.seen;
  if (trim(page.title).empty()) {
    ++stats_.malformed;
    return false;
  }
  if (page.body.size() < cfg_.min_body_chars) {
    ++stats_.too_short;
    return false;
  }
  if (page.body.size() > cfg_.max_body_chars) {
    ++stats_.too_long;
    return false;
  }
  for (const auto& re : title_patterns_) {
    if (std::regex_search(page.title, re)) {
      ++stats_.structure;
      return false;
    }
  }
  std::string page_ns = to_lower(page.ns);
  if (!page_ns.empty() && page_ns.back() == ':') page_ns.pop_back();
  for (const auto& ns : cfg_.banned_namespaces) {
    std::string bare = ns;
    if (!bare.empty() && bare.back() == ':') bare.pop_back();
    if (page.title.rfind(ns, 0) == 0 || (!page_ns.empty() && page_ns == to_lower(bare))) {
      ++stats_.meta;
      return false;
    }
  }
  if (cfg_.concept_filter) {
    try {
      if (!cfg_.concept_filter(page)) {
        ++stats_.concept_rejected;
        return false;
      }
    } catch (const std::exception&) {
      ++stats_.concept_failures;
    }
  }
  std::vector<std::string> names{normalize_answer(page.title)};
  for (const auto& a : page.aliases) names.push_back(normalize_answer(a));
  for (const auto& n : names) {
    if (!n.empty() && seen_names_.count(n)) {
      ++stats_.duplicate;
      return false;
    }
  }
  for (auto& n : names)
    if (!n.empty()) seen_names_.insert(std::move(n));
  ++stats_.kept;
  return true;
}

std::vector<SeedPage> filter_seeds(const std::vector<SeedPage>& pages, const SeedFilterConfig& cfg,
                                   SeedFilterStats* stats) {
  SeedFilter filter(cfg);
  std::vector<SeedPage> out;
  for (const auto& p : pages)
    if (filter.accept(p)) out.push_back(p);
  if (stats) *stats = filter.stats();
  return out;
}

nlohmann::json seed_to_json(const SeedPage& p) {
  return {{"title", p.title}, {"body", p.body}, {"aliases", p.aliases}, {"namespace", p.ns}, {"url", p.url}};
}

SeedPage seed_from_json(const nlohmann::json& j) {
  SeedPage p;
  p.title = j.at("title").get<std::string>();
  p.body = j.at("body").get<std::string>();
  if (j.contains("aliases"))
    for (const auto& a : j["aliases"]) p.aliases.insert(a.get<std::string>());
  p.ns = j.value("namespace", std::string{});
  p.url = j.value("url", std::string{});
  return p;
}

SeedFilterStats filter_seeds_jsonl(std::istream& in, std::ostream& out, const SeedFilterConfig& cfg) {
  SeedFilter filter(cfg);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    SeedPage page;
    try {
      page = seed_from_json(nlohmann::json::parse(line));
    } catch (const std::exception&) {
      filter.count_malformed();
      continue;
    }
    if (filter.accept(page)) out << seed_to_json(page).dump() << '\n';
  }
  return filter.stats();
}

}  // namespace sf
