// Acceptance suite: runs every criterion and prints one pass/fail line each.
// Exits nonzero if any criterion fails.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "mock_logic.hpp"
#include "oracles.hpp"
#include "ragprobe/bm25.hpp"
#include "ragprobe/dataset.hpp"
#include "ragprobe/error.hpp"
#include "ragprobe/metrics.hpp"
#include "ragprobe/pca.hpp"
#include "ragprobe/perturb.hpp"
#include "ragprobe/runfile.hpp"
#include "ragprobe/runner.hpp"
#include "ragprobe/stopwords.hpp"
#include "ragprobe/typo.hpp"
#include "ragprobe/util.hpp"

#ifdef RAGPROBE_HAVE_EIGEN
#include "eigen_oracle.hpp"
#endif

using namespace ragprobe;
using nlohmann::json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("acceptance-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

class StandardChat final : public ChatEndpoint {
 public:
  std::string chat(const std::vector<ChatMessage>& messages, const ChatParams&) override {
    std::string user;
    for (const auto& message : messages) {
      if (message.role == "user") user = message.content;
    }
    return mock::chat_response(user);
  }
};

// ---- criterion 1: BM25 oracle equivalence --------------------------------

void criterion_bm25_oracle() {
  const std::vector<std::string> vocab = {
      "cat",  "dog",   "sat",   "mat",  "river", "stone", "wind",  "cloud", "tree",  "branch",
      "leaf", "root",  "tiger", "crane", "otter", "heron", "moss",  "fern",  "valley", "ridge",
      "dust", "rain",  "snow",  "ember", "copper", "iron",  "salt",  "grain", "boat",  "sail",
      "rope", "knot",  "chart", "star",  "moon",  "tide",  "quay",  "pier",  "dune",  "reef",
  };
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  size_t corpora = 0, queries = 0;
  for (int trial = 0; trial < 50; ++trial) {
    size_t n_docs = 20 + rng() % 181;  // up to 200
    auto corpus = oracles::random_corpus(rng, n_docs, vocab);
    bool multi = trial % 2 == 1;
    auto index = InvertedIndex::build(corpus, multi);
    oracles::BruteForceBm25 oracle{corpus, multi};
    Bm25Params params{0.9, 0.4};
    ++corpora;
    for (int q = 0; q < 20; ++q) {
      std::string query;
      size_t terms = 1 + rng() % 5;
      for (size_t t = 0; t < terms; ++t) query += (t ? " " : "") + vocab[rng() % vocab.size()];
      auto got =
          index.search(params, query, 10, multi ? SearchMode::multi_field : SearchMode::flat);
      auto want = oracle.search(params, query, 10, multi);
      require(got.docs.size() == want.size(), "result size mismatch for query: " + query);
      for (size_t i = 0; i < want.size(); ++i) {
        require(got.docs[i].doc_id == want[i].doc_id,
                "ranking mismatch at " + std::to_string(i) + " for query: " + query);
        require(std::abs(got.docs[i].score - want[i].score) < 1e-9,
                "score mismatch for query: " + query);
      }
      ++queries;
    }
  }
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + "s exceeds 10s");
  std::printf("      %zu corpora, %zu queries, %.2fs\n", corpora, queries, elapsed);
}

// ---- criterion 2: typo rate law -------------------------------------------

void criterion_typo_rate_law() {
  std::mt19937_64 rng(424242);
  const std::vector<std::string> content{"fortress", "archive",  "mineral",  "harbor",
                                         "Voyager",  "lantern",  "granite",  "meadow",
                                         "covid19",  "traveler", "compass",  "quartz"};
  const std::vector<std::string> stops{"the", "of", "a", "is", "to", "and", "in", "when"};
  const auto& stop_words = default_stop_words();

  size_t produced = 0, violations = 0;
  while (produced < 10000) {
    std::string text;
    size_t words = 1 + rng() % 12;
    size_t eligible = 0;
    for (size_t w = 0; w < words; ++w) {
      if (!text.empty()) text += rng() % 6 == 0 ? "  " : " ";
      if (rng() % 3 == 0) {
        text += stops[rng() % stops.size()];
      } else {
        std::string word = content[rng() % content.size()];
        if (rng() % 4 == 0) word += ",";
        text += word;
        ++eligible;
      }
    }
    if (eligible == 0) continue;

    double rate;
    switch (rng() % 3) {
      case 0: rate = 0.10; break;
      case 1: rate = 0.25; break;
      default: rate = 0.05 + 0.95 * (static_cast<double>(rng() % 1000) / 1000.0); break;
    }
    TypoConfig config = TypoConfig::with_defaults(rate, rng());
    Query query{"q" + std::to_string(produced), text};
    auto record = perturb_typo(query, config, static_cast<int>(rng() % 5),
                               rate <= 0.15 ? Kind::typo_10 : Kind::typo_25);
    ++produced;

    auto diff = oracles::diff_typo(text, record.text, stop_words);
    bool ok = diff.whitespace_identical && diff.locality_ok && diff.adjacency_ok &&
              diff.stop_words_intact &&
              diff.changed_words == typo_word_count(rate, eligible);
    if (!ok) ++violations;
  }
  require(violations == 0, std::to_string(violations) + " violations in 10000 perturbations");
  std::printf("      10000 perturbations, 0 violations\n");
}

// ---- criterion 3: metric unit suite ---------------------------------------

void criterion_metric_units() {
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

  require(close(recall_at_k({"d1", "d2", "d3", "d4", "d5"}, {"d3"}, 5), 1.0), "recall ex1");
  require(close(recall_at_k({"d1", "d3", "d2", "d8", "d5"}, {"d3", "d9"}, 5), 0.5), "recall ex2");
  require(close(recall_at_k({}, {"d7"}, 5), 0.0), "recall ex3");

  require(close(precision_at_k({"d3", "d1", "d9", "d2", "d5"}, {"d3", "d9"}, 5), 0.4),
          "precision ex1");
  require(close(precision_at_k({"d1", "d2"}, {"d3"}, 5), 0.0), "precision ex2");
  require(close(precision_at_k({"d3", "d1"}, {"d3"}, 1), 1.0), "precision ex3");

  require(match_metric("The capital is Paris.", {"Paris"}) == 1, "match ex1");
  require(match_metric("I do not know", {"Paris"}) == 0, "match ex2");
  require(match_metric("it takes place in MAY each year", {"May"}) == 1, "match ex3");

  require(close(unigram_f1("same tokens here", {"same tokens here"}), 1.0), "f1 ex1");
  require(close(unigram_f1("alpha beta", {"gamma delta"}), 0.0), "f1 ex2");
  require(close(unigram_f1("a b c", {"b c d"}), 2.0 / 3.0), "f1 ex3");

  require(close(pearson({1, 2, 3}, {2, 4, 6}).r, 1.0), "pearson ex1");
  require(close(pearson({1, 2, 3}, {3, 2, 1}).r, -1.0), "pearson ex2");
  require(close(pearson({1, 2, 3, 4}, {1, 3, 2, 4}).r, 0.8), "pearson ex3");
  std::printf("      15 pinned examples within 1e-12\n");
}

// ---- criterion 4: PCA oracle ----------------------------------------------

void criterion_pca_oracle() {
#ifndef RAGPROBE_HAVE_EIGEN
  throw Failure("Eigen headers unavailable; oracle cannot run");
#else
  std::mt19937_64 rng(777);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 10 + rng() % 41;
    size_t d = 3 + rng() % 18;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& row : rows) {
      for (double& x : row) x = uniform() * 4 - 2;
    }
    auto result = pca_project(rows);

    // Sample covariance, recomputed independently.
    std::vector<double> mean(d, 0.0);
    for (const auto& row : rows) {
      for (size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    std::vector<double> cov(d * d, 0.0);
    for (const auto& row : rows) {
      for (size_t p = 0; p < d; ++p) {
        for (size_t q = 0; q < d; ++q) cov[p * d + q] += (row[p] - mean[p]) * (row[q] - mean[q]);
      }
    }
    for (double& c : cov) c /= static_cast<double>(n - 1);

    auto oracle = eigh_oracle(cov, d);
    double total = 0;
    for (double lambda : oracle.eigenvalues) total += lambda;
    require(std::abs(result.explained[0] - oracle.eigenvalues[d - 1] / total) < 1e-9,
            "explained[0] mismatch at trial " + std::to_string(trial));
    require(std::abs(result.explained[1] - oracle.eigenvalues[d - 2] / total) < 1e-9,
            "explained[1] mismatch at trial " + std::to_string(trial));

    // Principal angles between top-2 subspaces: singular values of V1^T V2
    // from the closed-form eigenvalues of the 2x2 Gram matrix.
    double m[2][2];
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        size_t col = j == 0 ? d - 1 : d - 2;
        double dot = 0;
        for (size_t r = 0; r < d; ++r) {
          dot += result.components[static_cast<size_t>(i)][r] * oracle.eigenvectors[r * d + col];
        }
        m[i][j] = dot;
      }
    }
    double g00 = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    double g11 = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    double g01 = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    double tr = g00 + g11;
    // Cancellation-free discriminant of the 2x2 symmetric eigenproblem.
    double half_diff = (g00 - g11) / 2.0;
    double disc = std::sqrt(half_diff * half_diff + g01 * g01);
    for (double lambda : {tr / 2.0 + disc, tr / 2.0 - disc}) {
      double angle = std::acos(std::min(1.0, std::sqrt(std::max(0.0, lambda))));
      require(angle < 1e-6,
              "principal angle " + std::to_string(angle) + " at trial " + std::to_string(trial));
    }
  }
  std::printf("      100 random matrices, principal angles < 1e-6\n");
#endif
}

// ---- criterion 5: directional replication on the toy dataset ---------------

std::map<Kind, double> toy_mean_recall_at_5(const std::filesystem::path& toy_dir, uint64_t seed) {
  auto corpus = load_corpus(toy_dir / "corpus.jsonl");
  auto queries = load_queries(toy_dir / "queries.jsonl");
  auto qrels = load_qrels(toy_dir / "qrels.tsv");
  auto gold = gold_sets(qrels);

  PerturbationOptions options;
  options.kinds = {Kind::typo_10, Kind::typo_25};
  options.base_seed = seed;
  auto dataset = build_perturbation_dataset(queries, options, nullptr);
  require(dataset.skips.empty(), "unexpected perturbation skips on the toy dataset");

  auto index = InvertedIndex::build(corpus, false);
  Bm25Params params{0.9, 0.4};
  std::vector<MetricRecord> records;
  for (const auto& rec : dataset.records) {
    auto result = index.search(params, rec.text, 5, SearchMode::flat);
    std::vector<std::string> retrieved;
    for (const auto& doc : result.docs) retrieved.push_back(doc.doc_id);
    records.push_back({{rec.origin_id, rec.kind, rec.variant},
                       Setting::retrieval,
                       "recall@5",
                       recall_at_k(retrieved, gold.at(rec.origin_id), 5)});
  }

  std::map<Kind, double> means;
  for (Kind kind : {Kind::original, Kind::typo_10, Kind::typo_25}) {
    auto agg = aggregate(records, Setting::retrieval, "recall@5", kind,
                         kind == Kind::original ? 1 : 5);
    require(agg.origin_count == queries.size(), "missing origins in aggregate");
    means[kind] = agg.mean;
  }
  return means;
}

void criterion_directional(const std::filesystem::path& toy_dir) {
  auto start = std::chrono::steady_clock::now();
  auto means = toy_mean_recall_at_5(toy_dir, 42);
  auto again = toy_mean_recall_at_5(toy_dir, 42);
  require(means == again, "toy recall means are not deterministic under the fixed seed");

  double original = means.at(Kind::original);
  double typo10 = means.at(Kind::typo_10);
  double typo25 = means.at(Kind::typo_25);
  require(typo25 < typo10, "expected recall(typo_25) < recall(typo_10)");
  require(typo10 < original, "expected recall(typo_10) < recall(original)");
  require(original - typo25 >= 0.05, "expected original - typo_25 >= 0.05");

  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed < 30.0, "runtime " + std::to_string(elapsed) + "s exceeds 30s");
  std::printf("      recall@5 original=%.4f typo_10=%.4f typo_25=%.4f (%.2fs)\n", original,
              typo10, typo25, elapsed);
}

// ---- criterion 6: decoupling sanity ----------------------------------------

void criterion_decoupling(const std::filesystem::path& toy_dir) {
  auto out = scratch_dir("decoupling");
  ExperimentConfig config;
  config.corpus_path = (toy_dir / "corpus.jsonl").string();
  config.queries_path = (toy_dir / "queries.jsonl").string();
  config.qrels_path = (toy_dir / "qrels.tsv").string();
  config.answers_path = (toy_dir / "answers.jsonl").string();
  config.kinds = {Kind::typo_10, Kind::typo_25};
  config.retriever.type = RetrieverType::sparse_flat;
  config.generator.model = "mock-llm";
  config.k = 5;
  config.k_grid = {1, 5};
  config.seed = 42;
  config.concurrency = 4;
  config.out_dir = (out / "runs").string();

  ExperimentRunner runner(config);
  runner.set_generator_endpoint(std::make_shared<StandardChat>());
  runner.ensure_perturbed();
  runner.ensure_retriever();
  runner.run_retrieval();
  runner.run_generation(Setting::closed_book);
  runner.run_generation(Setting::oracle);
  runner.run_generation(Setting::rag);
  runner.run_correlation();

  auto correlations = json::parse(slurp(runner.run_dir() / "correlations.json"));
  for (const char* kind : {"typo_10", "typo_25"}) {
    const auto& ret = correlations.at(kind).at("RET");
    require(!ret.value("degenerate", false), std::string(kind) + " RET cell is degenerate");
    require(std::abs(ret.value("r", 0.0) - 1.0) <= 1e-9,
            std::string(kind) + " RET-RAG r = " + std::to_string(ret.value("r", 0.0)));
    require(correlations.at(kind).at("CB").value("degenerate", false),
            std::string(kind) + " CB-RAG cell should be degenerate");
  }
  std::printf("      RET-RAG r = 1.0 within 1e-9; CB-RAG degenerate\n");
}

// ---- criterion 7: end-to-end golden run -------------------------------------

struct MockServers {
  httplib::Server server;
  std::thread listener;
  int port = 0;
  int chat_latency_ms;

  explicit MockServers(int latency) : chat_latency_ms(latency) {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      if (chat_latency_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(chat_latency_ms));
      }
      json body = json::parse(req.body, nullptr, false);
      std::string user;
      if (!body.is_discarded() && body.contains("messages")) {
        for (const auto& message : body["messages"]) {
          if (message.value("role", "") == "user") user = message.value("content", "");
        }
      }
      json reply;
      reply["choices"] = json::array(
          {{{"message", {{"role", "assistant"}, {"content", mock::chat_response(user)}}}}});
      res.set_content(reply.dump(), "application/json");
    });
    server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body, nullptr, false);
      json data = json::array();
      size_t i = 0;
      for (const auto& input : body["input"]) {
        data.push_back(
            {{"index", i++}, {"embedding", mock::embedding_of(input.get<std::string>(), 24)}});
      }
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    listener = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockServers() {
    server.stop();
    listener.join();
  }

  std::string chat_url() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

pid_t spawn_cli(const std::string& config_path) {
  pid_t pid = ::fork();
  if (pid == 0) {
    ::execl(RAGPROBE_CLI_PATH, RAGPROBE_CLI_PATH, "all", "--config", config_path.c_str(),
            static_cast<char*>(nullptr));
    _exit(127);
  }
  return pid;
}

int wait_for(pid_t pid) {
  int status = 0;
  ::waitpid(pid, &status, 0);
  return status;
}

void criterion_golden_run(const std::filesystem::path& toy_dir) {
  MockServers mocks(2);
  auto base = scratch_dir("golden");

  auto write_config = [&](const std::string& name, const std::string& out_dir) {
    json config;
    config["corpus"] = (toy_dir / "corpus.jsonl").string();
    config["queries"] = (toy_dir / "queries.jsonl").string();
    config["qrels"] = (toy_dir / "qrels.tsv").string();
    config["answers"] = (toy_dir / "answers.jsonl").string();
    config["kinds"] =
        json::array({"redundancy", "formal_tone", "ambiguity", "typo_10", "typo_25"});
    config["retriever"] = {{"type", "sparse_flat"}};
    config["generator"] = {{"endpoint", mocks.chat_url()}, {"model", "mock-llm"}};
    config["perturber"] = {{"endpoint", mocks.chat_url()}, {"model", "mock-perturber"}};
    config["settings"] = json::array({"closed_book", "oracle", "rag"});
    config["k"] = 5;
    config["k_grid"] = json::array({1, 5, 10, 20, 50, 100});
    config["seed"] = 42;
    config["concurrency"] = 2;
    config["out_dir"] = (base / out_dir).string();
    auto path = base / name;
    std::ofstream(path) << config.dump(2);
    return path.string();
  };

  const std::vector<std::string> report_files = {
      "perturbed.jsonl",          "retrieval.run",
      "metrics_retrieval.jsonl",  "gen_closed_book.jsonl",
      "metrics_closed_book.jsonl", "gen_oracle.jsonl",
      "metrics_oracle.jsonl",     "gen_rag.jsonl",
      "metrics_rag.jsonl",        "correlations.json",
      "report/means_by_kind.csv", "report/series_means.csv",
      "report/series_recall_vs_k.csv", "report/correlations.csv",
      "report/summary.json",
  };

  // Three independent full runs.
  std::vector<std::filesystem::path> run_dirs;
  for (const std::string tag : {"a", "b", "c"}) {
    auto config_path = write_config("config_" + tag + ".json", "out_" + tag);
    int status = wait_for(spawn_cli(config_path));
    require(WIFEXITED(status) && WEXITSTATUS(status) == 0,
            "clean run " + tag + " exited with status " + std::to_string(status));
    auto runner_config = ExperimentConfig::load(config_path);
    run_dirs.push_back(std::filesystem::path(runner_config.out_dir) /
                       ("run_" + runner_config.config_hash().substr(0, 16)));
  }
  for (const auto& file : report_files) {
    auto reference = slurp(run_dirs[0] / file);
    for (size_t i = 1; i < run_dirs.size(); ++i) {
      require(slurp(run_dirs[i] / file) == reference,
              "byte mismatch in " + file + " between reruns");
    }
  }

  // Kill in the middle of the RAG stage, then resume.
  auto kill_config = write_config("config_k.json", "out_k");
  auto kill_cfg = ExperimentConfig::load(kill_config);
  auto kill_dir = std::filesystem::path(kill_cfg.out_dir) /
                  ("run_" + kill_cfg.config_hash().substr(0, 16));
  pid_t pid = spawn_cli(kill_config);
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(120);
  while (!std::filesystem::exists(kill_dir / "stage_rag.started")) {
    require(std::chrono::steady_clock::now() < deadline, "rag stage never started");
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(400));
  ::kill(pid, SIGKILL);
  wait_for(pid);
  require(!std::filesystem::exists(kill_dir / "stage_rag.done"),
          "kill landed after the rag stage finished; cannot exercise resume");

  int status = wait_for(spawn_cli(kill_config));
  require(WIFEXITED(status) && WEXITSTATUS(status) == 0,
          "resumed run exited with status " + std::to_string(status));
  for (const auto& file : report_files) {
    require(slurp(kill_dir / file) == slurp(run_dirs[0] / file),
            "byte mismatch in " + file + " after kill-and-resume");
  }
  std::printf("      3 reruns + kill/resume byte-identical across %zu files\n",
              report_files.size());
}

// ---- criterion 8: oracle/rag consistency ------------------------------------

void criterion_oracle_rag_consistency(const std::filesystem::path& toy_dir) {
  auto out = scratch_dir("consistency");
  ExperimentConfig config;
  config.corpus_path = (toy_dir / "corpus.jsonl").string();
  config.queries_path = (toy_dir / "queries.jsonl").string();
  config.qrels_path = (toy_dir / "qrels.tsv").string();
  config.answers_path = (toy_dir / "answers.jsonl").string();
  config.kinds = {Kind::typo_10};
  config.retriever.type = RetrieverType::sparse_flat;
  config.generator.model = "mock-llm";
  config.k = 5;
  config.seed = 42;
  config.out_dir = (out / "runs").string();

  ExperimentRunner runner(config);
  runner.set_generator_endpoint(std::make_shared<StandardChat>());
  runner.ensure_perturbed();

  // Stub retriever: a runfile whose result list is exactly the gold set in
  // oracle order (relevance descending, then doc id).
  auto qrels = load_qrels(config.qrels_path);
  auto perturbed = load_perturbed_dataset(runner.perturbed_dataset_path());
  RunFile stub;
  for (const auto& rec : perturbed) {
    std::vector<ScoredDoc> docs;
    double score = 1.0;
    for (const auto& doc_id : gold_docs_ranked(qrels, rec.origin_id)) {
      docs.push_back({doc_id, score});
      score -= 0.01;
    }
    stub[QueryKey{rec.origin_id, rec.kind, rec.variant}.encode()] = std::move(docs);
  }
  save_runfile(stub, runner.run_dir() / "retrieval.run");
  std::ofstream(runner.stage_marker("retrieval")) << "{\"records\": " << stub.size() << "}\n";

  auto oracle_outcome = runner.run_generation(Setting::oracle);
  auto rag_outcome = runner.run_generation(Setting::rag);
  require(oracle_outcome.record_count == rag_outcome.record_count,
          "record counts differ between oracle and rag");

  auto parse_records = [](const std::filesystem::path& path) {
    std::map<std::string, json> by_key;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json record = json::parse(line);
      std::string key = record["origin"].get<std::string>() + "|" +
                        record["kind"].get<std::string>() + "|" +
                        std::to_string(record["variant"].get<int>());
      by_key[key] = std::move(record);
    }
    return by_key;
  };
  auto oracle_records = parse_records(runner.run_dir() / "gen_oracle.jsonl");
  auto rag_records = parse_records(runner.run_dir() / "gen_rag.jsonl");
  require(oracle_records.size() == rag_records.size(), "record key sets differ");
  for (const auto& [key, oracle_rec] : oracle_records) {
    auto it = rag_records.find(key);
    require(it != rag_records.end(), "rag missing record " + key);
    // Field-for-field; the setting label necessarily differs.
    for (const char* field : {"origin", "kind", "variant", "doc_ids", "output", "cache_key"}) {
      require(oracle_rec.at(field) == it->second.at(field),
              std::string("field ") + field + " differs for " + key);
    }
  }
  std::printf("      %zu record pairs equal field-for-field\n", oracle_records.size());
}

}  // namespace

int main() {
  const std::filesystem::path toy_dir = RAGPROBE_TOY_DIR;

  struct Criterion {
    const char* name;
    std::function<void()> run;
  };
  std::vector<Criterion> criteria = {
      {"C1 bm25-oracle-equivalence", [] { criterion_bm25_oracle(); }},
      {"C2 typo-rate-law", [] { criterion_typo_rate_law(); }},
      {"C3 metric-unit-suite", [] { criterion_metric_units(); }},
      {"C4 pca-oracle", [] { criterion_pca_oracle(); }},
      {"C5 directional-replication", [&] { criterion_directional(toy_dir); }},
      {"C6 decoupling-sanity", [&] { criterion_decoupling(toy_dir); }},
      {"C7 end-to-end-golden-run", [&] { criterion_golden_run(toy_dir); }},
      {"C8 oracle-rag-consistency", [&] { criterion_oracle_rag_consistency(toy_dir); }},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    try {
      criterion.run();
      std::printf("[PASS] %s\n", criterion.name);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] %s: %s\n", criterion.name, e.what());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
