#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "ragprobe/analyzer.hpp"
#include "ragprobe/bm25.hpp"
#include "ragprobe/error.hpp"
#include "testutil.hpp"

using namespace ragprobe;
using oracles::random_corpus;

namespace {

const std::vector<std::string> kVocab = {
    "cat",    "dog",   "sat",  "mat",   "river", "stone",  "wind",   "cloud", "tree",
    "branch", "leaf",  "root", "tiger", "crane", "otter",  "heron",  "moss",  "fern",
    "valley", "ridge", "dust", "rain",  "snow",  "ember",  "copper", "iron",  "salt",
    "grain",  "boat",  "sail", "rope",  "knot",  "chart",  "star",   "moon",  "tide",
};

}  // namespace

TEST_CASE("build exposes document statistics") {
  std::vector<Document> corpus{
      {"d1", "", "cat sat"}, {"d2", "", "dog sat"}, {"d3", "", "cat cat sat mat"}};
  auto index = InvertedIndex::build(corpus, false);
  CHECK(index.doc_count() == 3);
  const auto& field = index.field(Field::content);
  CHECK(field.postings.at("cat").size() == 2);  // df
  CHECK(field.doc_len[2] == 4);
  CHECK(field.postings.at("cat")[1].tf == 2);
  CHECK_THROWS_AS(InvertedIndex::build({}, false), Error);
  CHECK_THROWS_AS(index.field(Field::title), Error);
}

TEST_CASE("bm25_score matches the closed-form value") {
  std::vector<Document> corpus{{"d1", "", "cat sat"}, {"d2", "", "dog sat"},
                               {"d3", "", "cat cat cat"}};
  auto index = InvertedIndex::build(corpus, false);
  Bm25Params params{0.9, 0.4};

  // N=3, df(cat)=2, tf=1, dl=2, avgdl=7/3, evaluated directly from the
  // formula: idf = ln(1 + (3-2+0.5)/(2+0.5)), tf-part = 1.9/(1 + 0.9*(0.6 +
  // 0.4*(2/(7/3)))).
  double idf = std::log(1.0 + 1.5 / 2.5);
  double expected = idf * 1.9 / (1.0 + 0.9 * (0.6 + 0.4 * (2.0 / (7.0 / 3.0))));
  double got = index.score(params, {"cat"}, 0, Field::content);
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got == doctest::Approx(0.4831).epsilon(1e-4));

  // Terms absent from the doc contribute zero.
  CHECK(index.score(params, {"mat"}, 0, Field::content) == 0.0);
  // Duplicate query terms sum linearly.
  CHECK(index.score(params, {"cat", "cat"}, 0, Field::content) ==
        doctest::Approx(2.0 * got).epsilon(1e-12));
}

TEST_CASE("search basics") {
  std::vector<Document> corpus{{"d1", "", "cat sat"}, {"d2", "", "dog ran"},
                               {"d3", "", "bird flew"}};
  auto index = InvertedIndex::build(corpus, false);
  Bm25Params params;

  auto all = index.search(params, "cat dog bird", 10, SearchMode::flat);
  CHECK(all.docs.size() == 3);  // k larger than matches returns everything

  auto one = index.search(params, "bird", 5, SearchMode::flat);
  REQUIRE(one.docs.size() == 1);
  CHECK(one.docs[0].doc_id == "d3");

  auto empty = index.search(params, "!!! ...", 5, SearchMode::flat);
  CHECK(empty.empty_query);
  CHECK(empty.docs.empty());

  CHECK_THROWS_AS(index.search(params, "cat", 0, SearchMode::flat), Error);
  CHECK_THROWS_AS(index.search(params, "cat", 5, SearchMode::multi_field), Error);
}

TEST_CASE("multi_field sums per-field scores") {
  std::vector<Document> corpus{{"d1", "cat tales", "dog stories here"},
                               {"d2", "dog tales", "cat cat cat appear"},
                               {"d3", "mixed", "nothing relevant today"}};
  auto index = InvertedIndex::build(corpus, true);
  Bm25Params params{0.9, 0.4};
  auto result = index.search(params, "cat", 3, SearchMode::multi_field);
  REQUIRE(result.docs.size() == 2);
  for (const auto& doc : result.docs) {
    uint32_t ord = index.ordinal_of(doc.doc_id);
    double expected = index.score(params, {"cat"}, ord, Field::content) +
                      index.score(params, {"cat"}, ord, Field::title);
    CHECK(doc.score == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("analyzer is idempotent and unicode-tolerant") {
  auto tokens = analyze("Hello, World! caf\xC3\xA9 42nd");
  CHECK(tokens == std::vector<std::string>{"hello", "world", "caf\xC3\xA9", "42nd"});
  std::string joined;
  for (const auto& token : tokens) joined += token + " ";
  CHECK(analyze(joined) == tokens);
}

TEST_CASE("search agrees with the brute-force oracle on random corpora") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    size_t n_docs = 5 + rng() % 60;
    auto corpus = random_corpus(rng, n_docs, kVocab);
    bool multi = trial % 2 == 1;
    auto index = InvertedIndex::build(corpus, multi);
    oracles::BruteForceBm25 oracle{corpus, multi};
    Bm25Params params{0.9, 0.4};
    for (int q = 0; q < 10; ++q) {
      size_t terms = 1 + rng() % 4;
      std::string query;
      for (size_t t = 0; t < terms; ++t) {
        query += (t ? " " : "") + kVocab[rng() % kVocab.size()];
      }
      auto got = index.search(params, query, 10, multi ? SearchMode::multi_field
                                                       : SearchMode::flat);
      auto want = oracle.search(params, query, 10, multi);
      REQUIRE(got.docs.size() == want.size());
      for (size_t i = 0; i < want.size(); ++i) {
        CHECK(got.docs[i].doc_id == want[i].doc_id);
        CHECK(got.docs[i].score == doctest::Approx(want[i].score).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("adding a query-term occurrence never lowers the doc score") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = random_corpus(rng, 12, kVocab);
    std::string term = kVocab[rng() % kVocab.size()];
    size_t target = rng() % corpus.size();

    auto boosted = corpus;
    boosted[target].text += " " + term;

    auto base_index = InvertedIndex::build(corpus, false);
    auto boosted_index = InvertedIndex::build(boosted, false);
    Bm25Params params{0.9, 0.4};
    uint32_t ord = base_index.ordinal_of(corpus[target].id);
    double before = base_index.score(params, {term}, ord, Field::content);
    double after = boosted_index.score(params, {term}, ord, Field::content);
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("index structural invariants hold on random corpora") {
  std::mt19937_64 rng(123);
  auto corpus = random_corpus(rng, 50, kVocab);
  auto index = InvertedIndex::build(corpus, true);
  for (Field f : {Field::content, Field::title}) {
    const auto& field = index.field(f);
    // Sum of tf over a doc's postings equals its stored length; avgdl is the
    // mean of lengths; postings ascend by ordinal.
    std::vector<uint64_t> tf_sum(index.doc_count(), 0);
    uint64_t total = 0;
    for (const auto& [term, postings] : field.postings) {
      for (size_t i = 0; i < postings.size(); ++i) {
        if (i > 0) CHECK(postings[i - 1].doc < postings[i].doc);
        tf_sum[postings[i].doc] += postings[i].tf;
      }
    }
    for (size_t i = 0; i < index.doc_count(); ++i) {
      CHECK(tf_sum[i] == field.doc_len[i]);
      total += field.doc_len[i];
    }
    CHECK(field.avgdl() ==
          doctest::Approx(static_cast<double>(total) / index.doc_count()).epsilon(1e-12));
  }
}

TEST_CASE("save/load round-trips and rebuilds are deterministic") {
  std::mt19937_64 rng(77);
  auto corpus = random_corpus(rng, 40, kVocab);
  auto index = InvertedIndex::build(corpus, true);
  auto again = InvertedIndex::build(corpus, true);

  testutil::TempDir dir("sparse");
  index.save(dir / "a");
  again.save(dir / "b");
  CHECK(testutil::slurp(dir.path() / "a" / "index.bin") ==
        testutil::slurp(dir.path() / "b" / "index.bin"));

  auto loaded = InvertedIndex::load(dir / "a");
  Bm25Params params{1.2, 0.75};
  for (const char* query : {"cat dog", "river stone wind", "moss"}) {
    auto a = index.search(params, query, 8, SearchMode::multi_field);
    auto b = loaded.search(params, query, 8, SearchMode::multi_field);
    REQUIRE(a.docs.size() == b.docs.size());
    for (size_t i = 0; i < a.docs.size(); ++i) {
      CHECK(a.docs[i].doc_id == b.docs[i].doc_id);
      CHECK(a.docs[i].score == doctest::Approx(b.docs[i].score).epsilon(1e-12));
    }
  }
}

TEST_CASE("a built index serves concurrent searches") {
  std::mt19937_64 rng(31);
  auto corpus = random_corpus(rng, 60, kVocab);
  auto index = InvertedIndex::build(corpus, false);
  Bm25Params params;
  auto expected = index.search(params, "river stone", 10, SearchMode::flat);

  std::vector<std::thread> threads;
  std::vector<SearchResult> results(8);
  for (size_t t = 0; t < results.size(); ++t) {
    threads.emplace_back([&, t] {
      results[t] = index.search(params, "river stone", 10, SearchMode::flat);
    });
  }
  for (auto& thread : threads) thread.join();
  for (const auto& result : results) {
    REQUIRE(result.docs.size() == expected.docs.size());
    for (size_t i = 0; i < result.docs.size(); ++i) {
      CHECK(result.docs[i].doc_id == expected.docs[i].doc_id);
    }
  }
}
