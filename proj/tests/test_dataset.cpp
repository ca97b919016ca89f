#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ragprobe/dataset.hpp"
#include "ragprobe/error.hpp"
#include "testutil.hpp"

using namespace ragprobe;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

}  // namespace

TEST_CASE("corpus loading maps fields and preserves order") {
  testutil::TempDir dir("dataset");
  testutil::write_file(dir / "corpus.jsonl",
                       R"({"_id":"d1","title":"T","text":"hello world"})"
                       "\n"
                       R"({"_id":"d2","text":"no title here"})"
                       "\n"
                       R"({"_id":"d3","title":"","text":"third"})"
                       "\n");
  auto docs = load_corpus(dir / "corpus.jsonl");
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].id == "d1");
  CHECK(docs[0].title == "T");
  CHECK(docs[0].text == "hello world");
  CHECK(docs[1].title.empty());
  CHECK(docs[2].id == "d3");
}

TEST_CASE("corpus loader rejects duplicates, empty text and malformed lines") {
  testutil::TempDir dir("dataset");
  testutil::write_file(dir / "dup.jsonl",
                       R"({"_id":"d1","text":"a"})"
                       "\n"
                       R"({"_id":"d1","text":"b"})"
                       "\n");
  CHECK(code_of([&] { load_corpus(dir / "dup.jsonl"); }) == Errc::duplicate_id);

  testutil::write_file(dir / "empty.jsonl", R"({"_id":"d1","text":""})"
                                            "\n");
  CHECK(code_of([&] { load_corpus(dir / "empty.jsonl"); }) == Errc::empty_input);

  testutil::write_file(dir / "broken.jsonl", "{not json\n");
  try {
    load_corpus(dir / "broken.jsonl");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse);
    CHECK(std::string(e.what()).find(":1") != std::string::npos);  // line number
  }
}

TEST_CASE("qrels parsing, gold sets and flags") {
  testutil::TempDir dir("dataset");
  testutil::write_file(dir / "qrels.tsv",
                       "query-id\tcorpus-id\tscore\n"
                       "q1\td3\t1\n"
                       "q1\td4\t0\n"
                       "q2\td9\t2\n");
  auto qrels = load_qrels(dir / "qrels.tsv");
  REQUIRE(qrels.size() == 3);
  CHECK(qrels[0].relevance == 1);
  CHECK(qrels[1].relevance == 0);

  auto gold = gold_sets(qrels);
  CHECK(gold.at("q1") == std::set<std::string>{"d3"});  // relevance 0 excluded
  CHECK(gold.at("q2") == std::set<std::string>{"d9"});

  std::vector<Query> queries{{"q1", "a"}, {"q3", "b"}};
  auto flagged = queries_without_gold(queries, qrels);
  CHECK(flagged == std::vector<std::string>{"q3"});

  testutil::write_file(dir / "bad.tsv",
                       "query-id\tcorpus-id\tscore\n"
                       "q1\td3\tx\n");
  CHECK(code_of([&] { load_qrels(dir / "bad.tsv"); }) == Errc::parse);

  testutil::write_file(dir / "cols.tsv",
                       "query-id\tcorpus-id\tscore\n"
                       "q1\td3\n");
  CHECK(code_of([&] { load_qrels(dir / "cols.tsv"); }) == Errc::parse);

  testutil::write_file(dir / "noheader.tsv", "q1\td3\t1\n");
  CHECK(code_of([&] { load_qrels(dir / "noheader.tsv"); }) == Errc::parse);
}

TEST_CASE("gold docs rank by relevance then id") {
  std::vector<QRel> qrels{{"q1", "db", 1}, {"q1", "dc", 2}, {"q1", "da", 1}, {"q1", "dz", 0},
                          {"q2", "dx", 1}};
  CHECK(gold_docs_ranked(qrels, "q1") == std::vector<std::string>{"dc", "da", "db"});
  CHECK(gold_docs_ranked(qrels, "q3").empty());
}

TEST_CASE("answers loader validates entries") {
  testutil::TempDir dir("dataset");
  testutil::write_file(dir / "answers.jsonl",
                       R"({"query_id":"q1","answers":["May","the month of May"]})"
                       "\n");
  auto sets = load_answers(dir / "answers.jsonl");
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].answers.size() == 2);

  testutil::write_file(dir / "blank.jsonl", R"({"query_id":"q1","answers":["  "]})"
                                            "\n");
  CHECK(code_of([&] { load_answers(dir / "blank.jsonl"); }) == Errc::parse);

  testutil::write_file(dir / "none.jsonl", R"({"query_id":"q1","answers":[]})"
                                           "\n");
  CHECK(code_of([&] { load_answers(dir / "none.jsonl"); }) == Errc::parse);
}

TEST_CASE("perturbed dataset round-trips exactly") {
  std::vector<PerturbedQuery> records;
  records.push_back({"q1", Kind::original, 0, "what lies north of the wall", std::nullopt});
  for (int v = 0; v < 5; ++v) {
    records.push_back({"q1", Kind::typo_10, v, "variant text " + std::to_string(v),
                       uint64_t(1000 + v)});
    records.push_back({"q1", Kind::redundancy, v,
                       "a much longer restatement with \"quotes\" and unicode caf\xC3\xA9 " +
                           std::to_string(v),
                       std::nullopt});
  }

  testutil::TempDir dir("dataset");
  save_perturbed_dataset(records, dir / "pert.jsonl");
  auto loaded = load_perturbed_dataset(dir / "pert.jsonl");
  CHECK(loaded == records);

  // Saving twice produces identical bytes.
  save_perturbed_dataset(records, dir / "pert2.jsonl");
  CHECK(testutil::slurp(dir / "pert.jsonl") == testutil::slurp(dir / "pert2.jsonl"));

  // Empty list round-trips to an empty file.
  save_perturbed_dataset({}, dir / "empty.jsonl");
  CHECK(testutil::slurp(dir / "empty.jsonl").empty());
  CHECK(load_perturbed_dataset(dir / "empty.jsonl").empty());
}

TEST_CASE("perturbed dataset invariants are enforced") {
  testutil::TempDir dir("dataset");

  // Typo records must carry a seed.
  std::vector<PerturbedQuery> missing_seed{{"q1", Kind::typo_25, 0, "text", std::nullopt}};
  CHECK(code_of([&] { save_perturbed_dataset(missing_seed, dir / "x.jsonl"); }) ==
        Errc::invariant);

  // (origin, kind, variant) must be unique.
  std::vector<PerturbedQuery> dup{{"q1", Kind::ambiguity, 1, "a", std::nullopt},
                                  {"q1", Kind::ambiguity, 1, "b", std::nullopt}};
  CHECK(code_of([&] { save_perturbed_dataset(dup, dir / "y.jsonl"); }) == Errc::invariant);

  // Variant range and original-variant checks apply on load too.
  testutil::write_file(dir / "range.jsonl",
                       R"({"origin_id":"q1","kind":"typo_10","variant":9,"text":"t","seed":1})"
                       "\n");
  CHECK(code_of([&] { load_perturbed_dataset(dir / "range.jsonl"); }) == Errc::invariant);

  testutil::write_file(dir / "orig.jsonl",
                       R"({"origin_id":"q1","kind":"original","variant":2,"text":"t"})"
                       "\n");
  CHECK(code_of([&] { load_perturbed_dataset(dir / "orig.jsonl"); }) == Errc::invariant);
}

TEST_CASE("expected dataset scale: originals times variants per kind") {
  // 1496 origins at 5 variants yields 7480 records for one kind.
  std::vector<PerturbedQuery> records;
  for (int q = 0; q < 1496; ++q) {
    for (int v = 0; v < 5; ++v) {
      records.push_back({"q" + std::to_string(q), Kind::formal_tone, v, "text", std::nullopt});
    }
  }
  CHECK(records.size() == 7480);
  testutil::TempDir dir("dataset");
  save_perturbed_dataset(records, dir / "scale.jsonl");
  CHECK(load_perturbed_dataset(dir / "scale.jsonl").size() == 7480);
}
