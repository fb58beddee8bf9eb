// SPDX-License-Identifier: Apache-2.0
//
// Local document store behind the simulated search environment.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchforge/graph.hpp"

namespace sf {

struct Document {
  DocumentId id;
  std::string url;
  std::string title;
  std::string body;
  std::optional<std::string> entity_domain;
  bool is_distractor = false;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Append-only document list with unique urls and ids.
class Corpus {
 public:
  /// False (and no change) when the url or id is already present.
  bool add(Document doc);

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const std::vector<Document>& documents() const { return docs_; }
  const Document& at(std::size_t i) const { return docs_[i]; }

  const Document* find_by_url(const std::string& url) const;
  const Document* find_by_id(const DocumentId& id) const;
  std::optional<std::size_t> index_of_id(const DocumentId& id) const;

  /// Non-distractor documents.
  std::size_t evidence_count() const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_url_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct IngestStats {
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t kept = 0;
};

/// Corpus JSONL {id?, url, title, body, entity_domain?, is_distractor?}.
/// Duplicate urls keep the first record. Records without an id use their url.
/// Throws EmptyCorpus when nothing survives.
Corpus ingest_corpus(std::istream& in, IngestStats* stats = nullptr);

nlohmann::json document_to_json(const Document& d);
void write_corpus_jsonl(std::ostream& out, const Corpus& c);

/// Appends distractors until their count reaches round(ratio * evidence docs).
/// Existing documents are untouched. Throws InsufficientDistractors.
Corpus inject_noise(const Corpus& c, const std::vector<Document>& distractors, double ratio);

}  // namespace sf
