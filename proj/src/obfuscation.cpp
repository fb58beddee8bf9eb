// SPDX-License-Identifier: Apache-2.0
#include "searchforge/obfuscation.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_set>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

std::vector<UrlTemplate> default_url_templates() {
  return {
      {"person", "https://www.peopleprofiles.net/bio/{slug}-{id}"},
      {"person", "https://biographyhub.org/people/{slug}"},
      {"place", "https://www.placeatlas.com/{slug}/{id}"},
      {"place", "https://travel-gazetteer.net/destinations/{slug}"},
      {"organization", "https://orgregistry.com/entity/{id}/{slug}"},
      {"organization", "https://www.companyfacts.net/{slug}"},
      {"work", "https://creativearchive.org/works/{slug}-{id}"},
      {"work", "https://www.mediacatalog.net/title/{id}"},
      {"science", "https://sciencenotes.org/topic/{slug}"},
      {"event", "https://historyledger.com/events/{id}/{slug}"},
      {"general", "https://knowledgebase.net/article/{slug}-{id}"},
      {"general", "https://www.infopages.org/{slug}"},
  };
}

std::string keyword_domain_classifier(const Document& d) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kTable = {
      {"person", {"born", "died", "actor", "singer", "politician", "scientist", "writer", "player", "his", "her"}},
      {"place", {"city", "town", "village", "river", "mountain", "province", "district", "population", "located"}},
      {"organization", {"company", "founded", "university", "institute", "corporation", "organization", "club"}},
      {"work", {"film", "album", "novel", "song", "book", "series", "directed", "published"}},
      {"science", {"species", "theory", "chemical", "protein", "disease", "genus", "equation"}},
      {"event", {"battle", "war", "election", "tournament", "festival", "championship"}},
  };
  std::map<std::string, int> counts;
  for (const auto& t : tokenize(d.title)) counts[t] += 3;
  for (const auto& t : tokenize(std::string_view(d.body).substr(0, 600))) counts[t] += 1;
  std::string best = "general";
  int best_score = 0;
  for (const auto& [category, words] : kTable) {
    int s = 0;
    for (const auto& w : words) {
      auto it = counts.find(w);
      if (it != counts.end()) s += it->second;
    }
    if (s > best_score) {
      best_score = s;
      best = category;
    }
  }
  return best;
}

std::string url_host(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) return {};
  std::size_t start = scheme + 3;
  std::size_t end = url.find_first_of("/?#", start);
  std::string host = to_lower(url.substr(start, end == std::string::npos ? std::string::npos : end - start));
  auto at = host.rfind('@');
  if (at != std::string::npos) host = host.substr(at + 1);
  auto colon = host.find(':');
  if (colon != std::string::npos) host = host.substr(0, colon);
  return host;
}

bool url_matches_hosts(const std::string& url, const std::vector<std::string>& host_patterns) {
  const std::string host = url_host(url);
  if (host.empty()) return false;
  for (const auto& p : host_patterns) {
    const std::string pat = to_lower(p);
    if (host == pat) return true;
    if (host.size() > pat.size() && host.compare(host.size() - pat.size(), pat.size(), pat) == 0 &&
        host[host.size() - pat.size() - 1] == '.')
      return true;
  }
  return false;
}

ObfuscationResult obfuscate_urls(const Corpus& c, const std::vector<UrlTemplate>& lib,
                                 const DomainClassifier& classifier, std::uint64_t seed,
                                 const ObfuscationConfig& cfg) {
  if (lib.empty()) throw Error(ErrorCode::ConfigInvalid, "url template library is empty");
  std::map<std::string, std::vector<const UrlTemplate*>> by_category;
  for (const auto& t : lib) {
    if (t.pattern.rfind("https://", 0) != 0 && t.pattern.rfind("http://", 0) != 0)
      throw Error(ErrorCode::ConfigInvalid, "template is not an absolute url: " + t.pattern);
    if (url_host(fill_template(t.pattern, {{"slug", "x"}, {"id", "0"}})).empty())
      throw Error(ErrorCode::ConfigInvalid, "template has no host: " + t.pattern);
    by_category[t.domain_category].push_back(&t);
  }
  const auto& fallback = by_category.count("general") ? by_category["general"] : by_category.begin()->second;

  std::unordered_set<std::string> taken;
  for (const auto& d : c.documents()) taken.insert(d.url);

  ObfuscationResult out;
  for (const auto& src : c.documents()) {
    Document d = src;
    if (!url_matches_hosts(d.url, cfg.host_patterns)) {
      out.corpus.add(std::move(d));
      continue;
    }
    std::string category = d.entity_domain ? *d.entity_domain
                           : classifier    ? classifier(d)
                                           : keyword_domain_classifier(d);
    auto it = by_category.find(category);
    const auto& pool = it != by_category.end() ? it->second : fallback;
    const std::uint64_t h = fnv1a64(d.id, seed * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
    const UrlTemplate& tmpl = *pool[h % pool.size()];
    const std::string token = hex64(h).substr(0, 8);
    const std::string slug = slugify(d.title);

    std::string fresh;
    for (int attempt = 0; attempt <= cfg.retry_budget; ++attempt) {
      // collisions fall back to the per-document token, then a counter
      std::string s = attempt == 0 ? slug : attempt == 1 ? slug + "-" + token : slug + "-" + token + "-" + std::to_string(attempt);
      std::string candidate = fill_template(tmpl.pattern, {{"slug", s}, {"id", token}});
      if (!taken.count(candidate) && !url_matches_hosts(candidate, cfg.host_patterns)) {
        fresh = std::move(candidate);
        break;
      }
    }
    if (fresh.empty()) throw Error(ErrorCode::TemplateExhaustion, "no free url for '" + d.id + "'");
    taken.insert(fresh);
    out.mapping.emplace_back(d.url, fresh);
    d.url = fresh;
    d.entity_domain = category;
    out.corpus.add(std::move(d));
  }
  return out;
}

void write_mapping_tsv(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& mapping) {
  for (const auto& [from, to] : mapping) out << from << '\t' << to << '\n';
}

std::vector<std::pair<std::string, std::string>> read_mapping_tsv(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::MalformedRecord, "mapping line without tab");
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

}  // namespace sf
