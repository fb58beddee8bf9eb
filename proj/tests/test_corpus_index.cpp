// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "searchforge/corpus.hpp"
#include "searchforge/index.hpp"
#include "searchforge/obfuscation.hpp"
#include "searchforge/text.hpp"

using namespace sf;
using testutil::error_code;

namespace {

Document doc(std::string id, std::string title, std::string body, bool distractor = false) {
  Document d;
  d.id = id;
  d.url = "https://en.wikipedia.org/wiki/" + id;
  d.title = std::move(title);
  d.body = std::move(body);
  d.is_distractor = distractor;
  return d;
}

Corpus corpus_of(std::vector<Document> docs) {
  Corpus c;
  for (auto& d : docs) REQUIRE(c.add(std::move(d)));
  return c;
}

}  // namespace

TEST_CASE("text helpers") {
  CHECK(normalize_answer("  The  Eiffel-Tower! ") == "the eiffeltower");
  CHECK(tokenize("AI is a field") == std::vector<std::string>{"ai", "is", "field"});
  CHECK(answers_match("Paris, France", "paris"));
  CHECK_FALSE(answers_match("1905", "190"));
  CHECK(answers_match("1,905", "1905") == answers_match("1905", "1905"));
  CHECK(normalized_contains("Born in PARIS.", "paris"));
  CHECK(fill_template("{a}-{b}-{c}", {{"a", "1"}, {"b", "2"}}) == "1-2-{c}");
}

TEST_CASE("ingest deduplicates urls and skips malformed records") {
  std::istringstream in(
      "{\"url\":\"u1\",\"title\":\"A\",\"body\":\"alpha\"}\n"
      "{\"url\":\"u1\",\"title\":\"B\",\"body\":\"beta\"}\n"
      "{\"url\":\"u2\",\"title\":\"C\",\"body\":\"gamma\",\"id\":\"c\"}\n"
      "{\"url\":\"u3\",\"title\":\"D\"}\n");
  IngestStats st;
  auto c = ingest_corpus(in, &st);
  CHECK(c.size() == 2);
  CHECK(st.duplicates == 1);
  CHECK(st.malformed == 1);
  CHECK(c.find_by_url("u1")->title == "A");
  CHECK(c.find_by_id("u1") != nullptr);
  CHECK(c.find_by_id("c")->url == "u2");

  std::istringstream empty("");
  CHECK(error_code([&] { ingest_corpus(empty); }) == ErrorCode::EmptyCorpus);

  std::ostringstream out;
  write_corpus_jsonl(out, c);
  std::istringstream again(out.str());
  auto c2 = ingest_corpus(again);
  CHECK(c2.documents() == c.documents());
}

TEST_CASE("index build hash is deterministic and content sensitive") {
  auto c = corpus_of({doc("a", "Alpha", "one two"), doc("b", "Beta", "two three")});
  auto h1 = IndexSnapshot::build(c).build_hash();
  CHECK(h1 == IndexSnapshot::build(c).build_hash());
  auto c2 = corpus_of({doc("a", "Alpha", "one two"), doc("b", "Beta", "two four")});
  CHECK(h1 != IndexSnapshot::build(c2).build_hash());
}

TEST_CASE("tokenizer rule shows in the postings") {
  auto idx = IndexSnapshot::build(corpus_of({doc("a", "T", "AI is a word")}));
  CHECK(idx.postings("ai") != nullptr);
  CHECK(idx.postings("a") == nullptr);
}

TEST_CASE("bm25 scores match the textbook formula") {
  // equal length docs, tf 2 vs 1 for "river"
  auto idx = IndexSnapshot::build(corpus_of({doc("d1", "x", "river river lake"), doc("d2", "x", "river lake hill"),
                                             doc("d3", "x", "hill dune moor"), doc("d4", "x", "moor fen bog"),
                                             doc("d5", "x", "bog fen moor")}));
  auto res = idx.search_one("river", 10);
  REQUIRE(res.size() == 2);
  CHECK(res[0].doc_id == "d1");
  const double avg = idx.avg_doc_length();
  CHECK(avg == doctest::Approx(3.0));  // one-letter titles are not tokens
  const double w = oracle::bm25_idf(5, 2);
  CHECK(idx.idf("river") == doctest::Approx(w));
  CHECK(res[0].score == doctest::Approx(oracle::bm25_term(2, 3, avg, w)).epsilon(1e-12));
  CHECK(res[1].score == doctest::Approx(oracle::bm25_term(1, 3, avg, w)).epsilon(1e-12));
}

TEST_CASE("a term in every document hits the idf floor") {
  auto idx = IndexSnapshot::build(corpus_of({doc("d1", "x", "common alpha"), doc("d2", "x", "common beta"),
                                             doc("d3", "x", "common gamma")}));
  CHECK(oracle::bm25_idf(3, 3) == 0.0);
  CHECK(idx.idf("common") == 0.0);
  auto res = idx.search_one("common alpha", 3);
  REQUIRE(!res.empty());
  CHECK(res[0].doc_id == "d1");
  for (const auto& r : res) CHECK(std::isfinite(r.score));
  CHECK(res[0].score == doctest::Approx(oracle::bm25_term(1, 2, 2, oracle::bm25_idf(3, 1))));
}

TEST_CASE("search basics") {
  auto idx = IndexSnapshot::build(corpus_of({doc("d1", "x", "unique zebra"), doc("d2", "x", "plain text"),
                                             doc("d3", "x", "more plain")}));
  auto r = idx.search({"zebra"}, 5);
  REQUIRE(r.size() == 1);
  CHECK(r[0].at(0).doc_id == "d1");
  CHECK(error_code([&] { idx.search({""}, 5); }) == ErrorCode::EmptyQuery);
  CHECK(error_code([&] { idx.search({}, 5); }) == ErrorCode::EmptyQuery);
  CHECK(error_code([&] { idx.search({"x"}, 0); }) == ErrorCode::InvalidArgument);
  CHECK(idx.search_one("nothingmatches", 5).empty());
}

TEST_CASE("snippets are bounded and centred") {
  std::string body = std::string(500, 'a') + " needle " + std::string(500, 'b');
  auto s = make_snippet(body, "needle", 240);
  CHECK(s.size() <= 240);
  CHECK(s.find("needle") != std::string::npos);
  CHECK(make_snippet("short\nbody", "absent", 240) == "short body");
  std::string utf = std::string(239, 'a') + "\xc3\xa9";
  CHECK(make_snippet(utf, "absent", 240).size() == 239);
}

TEST_CASE("visit extracts goal lines or the leading prefix") {
  auto c = corpus_of({doc("d1", "x", "intro line\nsecond line\nthe harbour opened in 1901\nlast"),
                      doc("d2", "x", std::string(3000, 'z'))});
  auto v = visit(c, {c.at(0).url, "https://nowhere.example/none", c.at(1).url}, "harbour");
  REQUIRE(v.size() == 3);
  CHECK(v[0].status == VisitStatus::Ok);
  CHECK(v[0].content == "the harbour opened in 1901");
  CHECK(v[1].status == VisitStatus::NotFound);
  CHECK(v[2].content.size() == kMaxVisitChars);
  CHECK(v[2].content == std::string(kMaxVisitChars, 'z'));

  auto summarized = visit(c, {c.at(0).url}, "harbour", kMaxVisitChars,
                          [](const Document& d, const std::string& goal) { return d.id + ":" + goal; });
  CHECK(summarized[0].content == "d1:harbour");
  auto fallback = visit(c, {c.at(0).url}, "harbour", kMaxVisitChars,
                        [](const Document&, const std::string&) -> std::string { throw std::runtime_error("x"); });
  CHECK(fallback[0].content == "the harbour opened in 1901");
}

TEST_CASE("noise injection") {
  Corpus c;
  for (int i = 0; i < 100; ++i) c.add(doc("e" + std::to_string(i), "t", "b"));
  std::vector<Document> pool;
  for (int i = 0; i < 250; ++i) pool.push_back(doc("n" + std::to_string(i), "t", "b"));
  CHECK(inject_noise(c, pool, 0).documents() == c.documents());
  auto noisy = inject_noise(c, pool, 2);
  CHECK(noisy.size() == 300);
  CHECK(noisy.evidence_count() == 100);
  for (std::size_t i = 0; i < 100; ++i) CHECK(noisy.at(i) == c.at(i));
  CHECK(error_code([&] { inject_noise(c, pool, 3); }) == ErrorCode::InsufficientDistractors);
}

TEST_CASE("url obfuscation") {
  Corpus c;
  for (int i = 0; i < 40; ++i) c.add(doc("p" + std::to_string(i), "Same Title", "a town located on a river"));
  Document keep;
  keep.id = "k";
  keep.url = "https://example.org/k";
  keep.title = "Keep";
  keep.body = "x";
  c.add(keep);
  auto a = obfuscate_urls(c, default_url_templates(), keyword_domain_classifier, 9);
  auto b = obfuscate_urls(c, default_url_templates(), keyword_domain_classifier, 9);
  CHECK(a.mapping == b.mapping);
  CHECK(a.mapping.size() == 40);
  std::set<std::string> urls;
  for (const auto& d : a.corpus.documents()) {
    CHECK_FALSE(url_matches_hosts(d.url, ObfuscationConfig{}.host_patterns));
    urls.insert(d.url);
  }
  CHECK(urls.size() == a.corpus.size());
  CHECK(a.corpus.find_by_id("k")->url == "https://example.org/k");
  CHECK(url_host("https://En.Wikipedia.org/wiki/X") == "en.wikipedia.org");

  std::ostringstream out;
  write_mapping_tsv(out, a.mapping);
  std::istringstream in(out.str());
  CHECK(read_mapping_tsv(in) == a.mapping);

  CHECK(error_code([&] { obfuscate_urls(c, {}, keyword_domain_classifier, 1); }) == ErrorCode::ConfigInvalid);
  ObfuscationConfig tight;
  tight.retry_budget = 1;
  std::vector<UrlTemplate> one{{"general", "https://one.example/fixed"}};
  CHECK(error_code([&] { obfuscate_urls(c, one, [](const Document&) { return std::string("general"); }, 1, tight); }) ==
        ErrorCode::TemplateExhaustion);
}
