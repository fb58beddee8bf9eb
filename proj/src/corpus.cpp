// SPDX-License-Identifier: Apache-2.0
#include "searchforge/corpus.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

bool Corpus::add(Document doc) {
  if (by_url_.count(doc.url) || by_id_.count(doc.id)) return false;
  by_url_.emplace(doc.url, docs_.size());
  by_id_.emplace(doc.id, docs_.size());
  docs_.push_back(std::move(doc));
  return true;
}

const Document* Corpus::find_by_url(const std::string& url) const {
  auto it = by_url_.find(url);
  return it == by_url_.end() ? nullptr : &docs_[it->second];
}

const Document* Corpus::find_by_id(const DocumentId& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

std::optional<std::size_t> Corpus::index_of_id(const DocumentId& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::evidence_count() const {
  std::size_t n = 0;
  for (const auto& d : docs_) n += d.is_distractor ? 0 : 1;
  return n;
}

Corpus ingest_corpus(std::istream& in, IngestStats* stats) {
  IngestStats st;
  Corpus c;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++st.records;
    Document d;
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("url") || !j.contains("title") || !j.contains("body") ||
          !j["url"].is_string() || !j["title"].is_string() || !j["body"].is_string()) {
        ++st.malformed;
        continue;
      }
      d.url = j["url"].get<std::string>();
      d.title = j["title"].get<std::string>();
      d.body = j["body"].get<std::string>();
      d.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : d.url;
      if (j.contains("entity_domain") && j["entity_domain"].is_string())
        d.entity_domain = j["entity_domain"].get<std::string>();
      d.is_distractor = j.value("is_distractor", false);
    } catch (const nlohmann::json::exception&) {
      ++st.malformed;
      continue;
    }
    if (d.url.empty() || d.body.empty()) {
      ++st.malformed;
      continue;
    }
    if (c.add(std::move(d))) {
      ++st.kept;
    } else {
      ++st.duplicates;
    }
  }
  if (stats) *stats = st;
  if (c.empty()) throw Error(ErrorCode::EmptyCorpus, "no usable records");
  return c;
}

nlohmann::json document_to_json(const Document& d) {
  nlohmann::json j = {{"id", d.id}, {"url", d.url}, {"title", d.title}, {"body", d.body}};
  if (d.entity_domain) j["entity_domain"] = *d.entity_domain;
  if (d.is_distractor) j["is_distractor"] = true;
  return j;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& c) {
  for (const auto& d : c.documents()) out << document_to_json(d).dump() << '\n';
}

Corpus inject_noise(const Corpus& c, const std::vector<Document>& distractors, double ratio) {
  if (!(ratio >= 0)) throw Error(ErrorCode::InvalidArgument, "noise ratio must be >= 0");
  const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(c.evidence_count())));
  Corpus out = c;
  std::size_t added = 0;
  for (const auto& d : distractors) {
    if (added >= target) break;
    Document copy = d;
    copy.is_distractor = true;
    if (out.add(std::move(copy))) ++added;
  }
  if (added < target)
    throw Error(ErrorCode::InsufficientDistractors,
                "needed " + std::to_string(target) + ", got " + std::to_string(added));
  return out;
}

}  // namespace sf
