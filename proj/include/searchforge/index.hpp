// SPDX-License-Identifier: Apache-2.0
//
// BM25 inverted index over a corpus snapshot, snippet extraction, and the
// goal-conditioned page visit.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "searchforge/corpus.hpp"

namespace sf {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Default snippet width in characters.
inline constexpr std::size_t kSnippetMax = 240;

struct SearchResult {
  std::string title;
  std::string snippet;
  std::string url;
  double score = 0;
  DocumentId doc_id;
};

struct Posting {
  std::uint32_t doc;
  std::uint32_t tf;
};

/// Immutable after build; safe to share across threads.
class IndexSnapshot {
 public:
  static IndexSnapshot build(Corpus corpus, Bm25Params params = {});

  /// One ranked list per query. Throws EmptyQuery for an empty query list or a
  /// blank query string, InvalidArgument for top_k < 1.
  std::vector<std::vector<SearchResult>> search(const std::vector<std::string>& queries, int top_k,
                                                std::size_t snippet_max = kSnippetMax) const;
  std::vector<SearchResult> search_one(const std::string& query, int top_k,
                                       std::size_t snippet_max = kSnippetMax) const;

  /// Floor-at-zero BM25 idf: max(0, ln((N - df + 0.5) / (df + 0.5))).
  double idf(const std::string& term) const;
  const std::vector<Posting>* postings(const std::string& term) const;

  const Corpus& corpus() const { return *corpus_; }
  std::shared_ptr<const Corpus> corpus_ptr() const { return corpus_; }
  const std::string& build_hash() const { return build_hash_; }
  std::size_t doc_count() const { return corpus_->size(); }
  double avg_doc_length() const { return avgdl_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  const Bm25Params& params() const { return params_; }

 private:
  std::shared_ptr<const Corpus> corpus_;
  Bm25Params params_;
  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_len_;
  double avgdl_ = 0;
  std::string build_hash_;
};

/// Fixed-width window (UTF-8 safe, newlines flattened) centred on the first
/// occurrence of `term` in `body`; the body prefix if the term is absent.
std::string make_snippet(const std::string& body, const std::string& term, std::size_t snippet_max);

enum class VisitStatus { Ok, NotFound };
std::string_view to_string(VisitStatus s);

struct VisitResult {
  std::string url;
  VisitStatus status = VisitStatus::Ok;
  std::string content;
};

/// Replaces extraction when configured; a throwing summarizer falls back.
using Summarizer = std::function<std::string(const Document&, const std::string& goal)>;

inline constexpr std::size_t kMaxVisitChars = 2000;

/// Lines of the body that contain at least one goal token, joined by blank
/// lines; the first `max_visit_chars` of the body when none match.
std::vector<VisitResult> visit(const Corpus& c, const std::vector<std::string>& urls, const std::string& goal,
                               std::size_t max_visit_chars = kMaxVisitChars, const Summarizer& summarizer = {});

}  // namespace sf
