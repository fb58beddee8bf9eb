// SPDX-License-Identifier: Apache-2.0
#include "searchforge/index.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

IndexSnapshot IndexSnapshot::build(Corpus corpus, Bm25Params params) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  IndexSnapshot idx;
  idx.params_ = params;
  idx.corpus_ = std::make_shared<const Corpus>(std::move(corpus));
  const auto& docs = idx.corpus_->documents();
  idx.doc_len_.resize(docs.size());

  std::unordered_map<std::uint32_t, std::uint32_t> tf;
  std::uint64_t total = 0;
  for (std::uint32_t d = 0; d < docs.size(); ++d) {
    tf.clear();
    std::uint32_t len = 0;
    auto count = [&](std::string_view text) {
      for (auto& tok : tokenize(text)) {
        auto [it, fresh] = idx.vocab_.try_emplace(std::move(tok), static_cast<std::uint32_t>(idx.vocab_.size()));
        if (fresh) idx.postings_.emplace_back();
        ++tf[it->second];
        ++len;
      }
    };
    count(docs[d].title);
    count(docs[d].body);
    for (const auto& [term, n] : tf) idx.postings_[term].push_back({d, n});
    idx.doc_len_[d] = len;
    total += len;
  }
  idx.avgdl_ = docs.empty() ? 0 : static_cast<double>(total) / static_cast<double>(docs.size());

  std::vector<const Document*> sorted;
  sorted.reserve(docs.size());
  for (const auto& d : docs) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(), [](const Document* a, const Document* b) { return a->id < b->id; });
  std::uint64_t h = fnv1a64("bm25");
  std::ostringstream p;
  p << params.k1 << '/' << params.b;
  h = fnv1a64(p.str(), h);
  for (const Document* d : sorted) {
    h = fnv1a64(d->id, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(d->url, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(d->title, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(d->body, h);
    h = fnv1a64(d->is_distractor ? "\x1e" "1" : "\x1e" "0", h);
  }
  idx.build_hash_ = hex64(h);
  return idx;
}

double IndexSnapshot::idf(const std::string& term) const {
  const auto* p = postings(term);
  const double df = p ? static_cast<double>(p->size()) : 0.0;
  const double n = static_cast<double>(doc_count());
  return std::max(0.0, std::log((n - df + 0.5) / (df + 0.5)));
}

const std::vector<Posting>* IndexSnapshot::postings(const std::string& term) const {
  auto it = vocab_.find(term);
  return it == vocab_.end() ? nullptr : &postings_[it->second];
}

std::string make_snippet(const std::string& body, const std::string& term, std::size_t snippet_max) {
  std::size_t center = 0;
  bool found = false;
  if (!term.empty()) {
    for (const auto& span : tokenize_with_offsets(body)) {
      if (span.token == term) {
        center = span.offset + span.token.size() / 2;
        found = true;
        break;
      }
    }
  }
  std::size_t start = 0;
  if (found && body.size() > snippet_max) {
    start = center > snippet_max / 2 ? center - snippet_max / 2 : 0;
    start = std::min(start, body.size() - snippet_max);
  }
  std::size_t end = std::min(body.size(), start + snippet_max);
  auto continuation = [&](std::size_t i) {
    return i < body.size() && (static_cast<unsigned char>(body[i]) & 0xC0) == 0x80;
  };
  while (start < end && continuation(start)) ++start;
  while (end > start && continuation(end)) --end;
  std::string out = body.substr(start, end - start);
  for (auto& c : out)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  return out;
}

std::vector<SearchResult> IndexSnapshot::search_one(const std::string& query, int top_k,
                                                    std::size_t snippet_max) const {
  if (top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  if (trim(query).empty()) throw Error(ErrorCode::EmptyQuery, "blank query");

  std::vector<std::string> terms;
  for (auto& t : tokenize(query))
    if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(std::move(t));

  const std::size_t n = doc_count();
  thread_local std::vector<double> scores;
  thread_local std::vector<char> touched_flag;
  if (scores.size() < n) {
    scores.assign(n, 0.0);
    touched_flag.assign(n, 0);
  }
  std::vector<std::uint32_t> touched;
  std::vector<std::pair<const std::vector<Posting>*, double>> active;
  for (const auto& t : terms) {
    const auto* p = postings(t);
    if (!p) continue;
    const double w = idf(t);
    active.emplace_back(p, w);
    for (const auto& post : *p) {
      const double tf = post.tf;
      const double norm = params_.k1 * (1 - params_.b + params_.b * doc_len_[post.doc] / avgdl_);
      scores[post.doc] += w * tf * (params_.k1 + 1) / (tf + norm);
      if (!touched_flag[post.doc]) {
        touched_flag[post.doc] = 1;
        touched.push_back(post.doc);
      }
    }
  }

  const auto& docs = corpus_->documents();
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return docs[a].id < docs[b].id;
  };
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top_k), touched.size());
  std::partial_sort(touched.begin(), touched.begin() + static_cast<long>(k), touched.end(), better);

  std::vector<SearchResult> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint32_t d = touched[i];
    // Highest-contribution query term for this document anchors the snippet.
    std::string anchor;
    double best = -1;
    for (std::size_t ti = 0, ai = 0; ti < terms.size(); ++ti) {
      const auto* p = postings(terms[ti]);
      if (!p) continue;
      const double w = active[ai++].second;
      auto it = std::lower_bound(p->begin(), p->end(), d,
                                 [](const Posting& post, std::uint32_t doc) { return post.doc < doc; });
      if (it == p->end() || it->doc != d) continue;
      const double tf = it->tf;
      const double norm = params_.k1 * (1 - params_.b + params_.b * doc_len_[d] / avgdl_);
      const double contrib = w * tf * (params_.k1 + 1) / (tf + norm);
      if (contrib > best) {
        best = contrib;
        anchor = terms[ti];
      }
    }
    out.push_back({docs[d].title, make_snippet(docs[d].body, anchor, snippet_max), docs[d].url, scores[d], docs[d].id});
  }
  for (std::uint32_t d : touched) {
    scores[d] = 0.0;
    touched_flag[d] = 0;
  }
  return out;
}

std::vector<std::vector<SearchResult>> IndexSnapshot::search(const std::vector<std::string>& queries, int top_k,
                                                             std::size_t snippet_max) const {
  if (queries.empty()) throw Error(ErrorCode::EmptyQuery, "no queries");
  for (const auto& q : queries)
    if (trim(q).empty()) throw Error(ErrorCode::EmptyQuery, "blank query");
  std::vector<std::vector<SearchResult>> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(search_one(q, top_k, snippet_max));
  return out;
}

std::string_view to_string(VisitStatus s) { return s == VisitStatus::Ok ? "ok" : "not_found"; }

std::vector<VisitResult> visit(const Corpus& c, const std::vector<std::string>& urls, const std::string& goal,
                               std::size_t max_visit_chars, const Summarizer& summarizer) {
  std::set<std::string> goal_tokens;
  for (auto& t : tokenize(goal)) goal_tokens.insert(std::move(t));

  std::vector<VisitResult> out;
  for (const auto& url : urls) {
    const Document* d = c.find_by_url(url);
    if (!d) {
      out.push_back({url, VisitStatus::NotFound, ""});
      continue;
    }
    if (summarizer) {
      try {
        out.push_back({url, VisitStatus::Ok, summarizer(*d, goal)});
        continue;
      } catch (const std::exception&) {
      }
    }
    std::string content;
    std::istringstream lines(d->body);
    std::string line;
    while (std::getline(lines, line)) {
      if (trim(line).empty()) continue;
      bool hit = false;
      for (const auto& t : tokenize(line)) {
        if (goal_tokens.count(t)) {
          hit = true;
          break;
        }
      }
      if (!hit) continue;
      if (!content.empty()) content += "\n\n";
      content += trim(line);
    }
    if (content.empty()) content = d->body.substr(0, max_visit_chars);
    out.push_back({url, VisitStatus::Ok, std::move(content)});
  }
  return out;
}

}  // namespace sf
