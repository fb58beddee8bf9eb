// SPDX-License-Identifier: Apache-2.0
//
// Replaces encyclopedia-style urls with synthetic ones drawn from a template
// library keyed by entity domain, so agents cannot key on the source host.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "searchforge/corpus.hpp"

namespace sf {

struct UrlTemplate {
  std::string domain_category;
  std::string pattern;  // slots {slug} and {id}
};

std::vector<UrlTemplate> default_url_templates();

/// Maps a document to a domain category.
using DomainClassifier = std::function<std::string(const Document&)>;

/// Keyword table over title and the start of the body; "general" otherwise.
std::string keyword_domain_classifier(const Document& d);

struct ObfuscationConfig {
  std::vector<std::string> host_patterns{"wikipedia.org", "wikimedia.org", "wikidata.org", "baike.baidu.com"};
  int retry_budget = 16;
};

struct ObfuscationResult {
  Corpus corpus;
  std::vector<std::pair<std::string, std::string>> mapping;  // old -> new, corpus order
};

/// Host part of an absolute url, lowercased; empty when not parseable.
std::string url_host(const std::string& url);
bool url_matches_hosts(const std::string& url, const std::vector<std::string>& host_patterns);

/// Deterministic in `seed`; the mapping is injective and avoids every url
/// already in the corpus. Throws ConfigInvalid for an empty or malformed
/// library and TemplateExhaustion when retries run out.
ObfuscationResult obfuscate_urls(const Corpus& c, const std::vector<UrlTemplate>& lib,
                                 const DomainClassifier& classifier, std::uint64_t seed,
                                 const ObfuscationConfig& cfg = {});

void write_mapping_tsv(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& mapping);
std::vector<std::pair<std::string, std::string>> read_mapping_tsv(std::istream& in);

}  // namespace sf
