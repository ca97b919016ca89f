#include "ragprobe/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ragprobe/bm25.hpp"
#include "ragprobe/dataset.hpp"
#include "ragprobe/dense.hpp"
#include "ragprobe/error.hpp"
#include "ragprobe/metrics.hpp"
#include "ragprobe/parallel.hpp"
#include "ragprobe/perturb.hpp"
#include "ragprobe/runfile.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

namespace {

using nlohmann::json;

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value && *value ? value : fallback;
}

RetrieverType retriever_type_from_name(const std::string& name) {
  if (name == "sparse_flat") return RetrieverType::sparse_flat;
  if (name == "sparse_multi") return RetrieverType::sparse_multi;
  if (name == "dense") return RetrieverType::dense;
  raise(Errc::parse, "unknown retriever type: " + name);
}

const char* retriever_type_name(RetrieverType type) {
  switch (type) {
    case RetrieverType::sparse_flat: return "sparse_flat";
    case RetrieverType::sparse_multi: return "sparse_multi";
    case RetrieverType::dense: return "dense";
  }
  raise(Errc::invalid_argument, "unknown retriever type value");
}

json metric_to_json(const MetricRecord& rec) {
  json obj;
  obj["origin"] = rec.key.origin_id;
  obj["kind"] = kind_name(rec.key.kind);
  obj["variant"] = rec.key.variant;
  obj["setting"] = setting_name(rec.setting);
  obj["metric"] = rec.metric;
  obj["value"] = rec.value;
  return obj;
}

MetricRecord metric_from_json(const json& obj) {
  MetricRecord rec;
  rec.key.origin_id = obj.at("origin").get<std::string>();
  rec.key.kind = kind_from_name(obj.at("kind").get<std::string>());
  rec.key.variant = obj.at("variant").get<int>();
  rec.setting = setting_from_name(obj.at("setting").get<std::string>());
  rec.metric = obj.at("metric").get<std::string>();
  rec.value = obj.at("value").get<double>();
  return rec;
}

json generation_to_json(const GenerationRecord& rec) {
  json obj;
  obj["origin"] = rec.key.origin_id;
  obj["kind"] = kind_name(rec.key.kind);
  obj["variant"] = rec.key.variant;
  obj["setting"] = setting_name(rec.setting);
  obj["doc_ids"] = rec.doc_ids;
  obj["output"] = rec.output;
  obj["cache_key"] = rec.cache_key;
  return obj;
}

void save_metrics(const std::vector<MetricRecord>& records, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& rec : records) out << metric_to_json(rec).dump() << "\n";
  write_file_atomic(path, out.str());
}

std::vector<MetricRecord> load_metrics(const std::filesystem::path& path) {
  std::vector<MetricRecord> records;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty()) continue;
    records.push_back(metric_from_json(json::parse(line)));
  }
  return records;
}

struct StageTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

bool kind_requested(const std::vector<Kind>& kinds, Kind kind) {
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

std::vector<int> retrieval_k_values(const ExperimentConfig& config) {
  std::vector<int> ks = config.k_grid;
  if (std::find(ks.begin(), ks.end(), config.k) == ks.end()) ks.push_back(config.k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

}  // namespace

struct ExperimentRunner::Loaded {
  std::vector<Document> corpus;
  std::unordered_map<std::string, const Document*> corpus_by_id;
  std::vector<Query> queries;
  std::vector<QRel> qrels;
  std::map<std::string, std::set<std::string>> gold;
  std::unordered_map<std::string, std::vector<std::string>> answers;
};

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  json obj = json::parse(read_file(path), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    raise(Errc::parse, "config is not a JSON object: " + path.string());
  }

  ExperimentConfig config;
  config.corpus_path = obj.at("corpus").get<std::string>();
  config.queries_path = obj.at("queries").get<std::string>();
  config.qrels_path = obj.at("qrels").get<std::string>();
  config.answers_path = obj.at("answers").get<std::string>();
  if (obj.contains("perturbed")) config.perturbed_path = obj["perturbed"].get<std::string>();

  if (obj.contains("kinds")) {
    config.kinds.clear();
    for (const auto& name : obj["kinds"]) config.kinds.push_back(kind_from_name(name));
  }

  if (obj.contains("retriever")) {
    const auto& r = obj["retriever"];
    config.retriever.type = retriever_type_from_name(r.value("type", "sparse_flat"));
    config.retriever.index_dir = r.value("index_dir", "");
    config.retriever.matrix_path = r.value("matrix", "");
    config.retriever.k1 = r.value("k1", 0.9);
    config.retriever.b = r.value("b", 0.4);
    config.retriever.embed_endpoint = r.value("embed_endpoint", "");
    config.retriever.embed_model = r.value("embed_model", "");
    if (r.contains("query_prefix") && !r["query_prefix"].is_null()) {
      config.retriever.query_prefix = r["query_prefix"].get<std::string>();
    }
    config.retriever.normalize = r.value("normalize", true);
    config.retriever.batch_size = r.value("batch_size", 16);
  }

  if (obj.contains("generator")) {
    const auto& g = obj["generator"];
    config.generator.endpoint_url = g.value("endpoint", "");
    config.generator.model = g.value("model", "");
    config.generator.max_new_tokens = g.value("max_new_tokens", 128);
    config.generator.temperature = g.value("temperature", 0.0);
    config.generator.max_input_tokens = g.value("max_input_tokens", 4096);
    config.generator.doc_word_cap = g.value("doc_word_cap", 100);
    config.generator.retries = g.value("retries", 3);
  }

  if (obj.contains("perturber")) {
    const auto& p = obj["perturber"];
    config.perturber.endpoint = p.value("endpoint", "");
    config.perturber.model = p.value("model", "");
    config.perturber.retries = p.value("retries", 3);
  }

  if (obj.contains("settings")) {
    config.settings.clear();
    for (const auto& name : obj["settings"]) {
      config.settings.push_back(setting_from_name(name));
    }
  }

  config.k = obj.value("k", 5);
  if (obj.contains("k_grid")) config.k_grid = obj["k_grid"].get<std::vector<int>>();
  config.seed = obj.value("seed", static_cast<uint64_t>(0));
  config.concurrency = obj.value("concurrency", 4);
  config.out_dir = obj.value("out_dir", "runs");
  config.cache_dir = obj.value("cache_dir", "");

  config.generator.endpoint_url = env_or("RAGPROBE_CHAT_ENDPOINT", config.generator.endpoint_url);
  config.retriever.embed_endpoint =
      env_or("RAGPROBE_EMBED_ENDPOINT", config.retriever.embed_endpoint);
  config.perturber.endpoint = env_or("RAGPROBE_PERTURB_ENDPOINT", config.perturber.endpoint);
  return config;
}

std::string ExperimentConfig::config_hash() const {
  // Covers what determines outputs; endpoint URLs and execution knobs
  // (concurrency, batch size, retries, out_dir) stay out.
  json obj;
  obj["corpus"] = corpus_path;
  obj["queries"] = queries_path;
  obj["qrels"] = qrels_path;
  obj["answers"] = answers_path;
  obj["perturbed"] = perturbed_path;
  json kinds_json = json::array();
  for (Kind kind : kKindOrder) {
    if (kind != Kind::original && kind_requested(kinds, kind)) kinds_json.push_back(kind_name(kind));
  }
  obj["kinds"] = kinds_json;
  obj["retriever"] = {{"type", retriever_type_name(retriever.type)},
                      {"index_dir", retriever.index_dir},
                      {"matrix", retriever.matrix_path},
                      {"k1", retriever.k1},
                      {"b", retriever.b},
                      {"embed_model", retriever.embed_model},
                      {"query_prefix", retriever.query_prefix.value_or(std::string("\x01auto"))},
                      {"normalize", retriever.normalize}};
  obj["generator"] = {{"model", generator.model},
                      {"max_new_tokens", generator.max_new_tokens},
                      {"temperature", generator.temperature},
                      {"max_input_tokens", generator.max_input_tokens},
                      {"doc_word_cap", generator.doc_word_cap}};
  obj["perturber_model"] = perturber.model;
  json settings_json = json::array();
  for (Setting setting : {Setting::closed_book, Setting::oracle, Setting::rag}) {
    if (std::find(settings.begin(), settings.end(), setting) != settings.end()) {
      settings_json.push_back(setting_name(setting));
    }
  }
  obj["settings"] = settings_json;
  obj["k"] = k;
  obj["k_grid"] = k_grid;
  obj["seed"] = seed;
  return sha256_hex(obj.dump());
}

ExperimentRunner::ExperimentRunner(ExperimentConfig config) : config_(std::move(config)) {
  std::string hash = config_.config_hash();
  run_dir_ = std::filesystem::path(config_.out_dir) / ("run_" + hash.substr(0, 16));
  std::filesystem::create_directories(run_dir_);

  auto manifest_path = run_dir_ / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    json manifest;
    manifest["config_hash"] = hash;
    manifest["code_version"] = kCodeVersion;
    manifest["retriever"] = retriever_type_name(config_.retriever.type);
    manifest["generator_model"] = config_.generator.model;
    manifest["k"] = config_.k;
    manifest["seed"] = config_.seed;
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  } else {
    json manifest = json::parse(read_file(manifest_path), nullptr, false);
    if (manifest.is_discarded() || manifest.value("config_hash", "") != hash) {
      raise(Errc::invariant, "run directory manifest does not match this configuration: " +
                                 manifest_path.string());
    }
  }
}

void ExperimentRunner::set_generator_endpoint(std::shared_ptr<ChatEndpoint> endpoint) {
  generator_endpoint_ = std::move(endpoint);
}

void ExperimentRunner::set_perturber_endpoint(std::shared_ptr<ChatEndpoint> endpoint) {
  perturber_endpoint_ = std::move(endpoint);
}

void ExperimentRunner::set_embedding_endpoint(std::shared_ptr<EmbeddingEndpoint> endpoint) {
  embedding_endpoint_ = std::move(endpoint);
}

ChatEndpoint& ExperimentRunner::generator_endpoint() {
  if (!generator_endpoint_) {
    if (config_.generator.endpoint_url.empty()) {
      raise(Errc::invalid_argument, "no generator chat endpoint configured");
    }
    HttpOptions options = http_options_from_env();
    options.max_retries = config_.generator.retries;
    generator_endpoint_ = make_http_chat_endpoint(config_.generator.endpoint_url, options);
  }
  return *generator_endpoint_;
}

ChatEndpoint& ExperimentRunner::perturber_endpoint() {
  if (!perturber_endpoint_) {
    if (config_.perturber.endpoint.empty()) {
      raise(Errc::invalid_argument, "no perturber chat endpoint configured");
    }
    HttpOptions options = http_options_from_env();
    options.max_retries = config_.perturber.retries;
    perturber_endpoint_ = make_http_chat_endpoint(config_.perturber.endpoint, options);
  }
  return *perturber_endpoint_;
}

EmbeddingEndpoint& ExperimentRunner::embedding_endpoint() {
  if (!embedding_endpoint_) {
    if (config_.retriever.embed_endpoint.empty()) {
      raise(Errc::invalid_argument, "no embedding endpoint configured");
    }
    embedding_endpoint_ =
        make_http_embedding_endpoint(config_.retriever.embed_endpoint, http_options_from_env());
  }
  return *embedding_endpoint_;
}

const ExperimentRunner::Loaded& ExperimentRunner::loaded() {
  if (!loaded_) {
    auto data = std::make_shared<Loaded>();
    data->corpus = load_corpus(config_.corpus_path);
    for (const auto& doc : data->corpus) data->corpus_by_id[doc.id] = &doc;
    data->queries = load_queries(config_.queries_path);
    data->qrels = load_qrels(config_.qrels_path);
    data->gold = gold_sets(data->qrels);
    for (auto& set : load_answers(config_.answers_path)) {
      data->answers[set.query_id] = std::move(set.answers);
    }
    loaded_ = std::move(data);
  }
  return *loaded_;
}

std::filesystem::path ExperimentRunner::perturbed_dataset_path() const {
  if (!config_.perturbed_path.empty()) return config_.perturbed_path;
  return run_dir_ / "perturbed.jsonl";
}

std::filesystem::path ExperimentRunner::stage_marker(const std::string& stage) const {
  return run_dir_ / ("stage_" + stage + ".done");
}

bool ExperimentRunner::stage_done(const std::string& stage) const {
  return std::filesystem::exists(stage_marker(stage));
}

StageOutcome ExperimentRunner::reuse_outcome(const std::string& stage) const {
  StageOutcome outcome;
  outcome.stage = stage;
  outcome.reused = true;
  json obj = json::parse(read_file(stage_marker(stage)), nullptr, false);
  if (!obj.is_discarded()) {
    outcome.record_count = obj.value("records", static_cast<size_t>(0));
    if (obj.contains("skips")) {
      for (const auto& skip : obj["skips"]) {
        outcome.skips.push_back({skip.value("key", ""), skip.value("reason", "")});
      }
    }
  }
  return outcome;
}

void ExperimentRunner::mark_started(const std::string& stage) const {
  write_file_atomic(run_dir_ / ("stage_" + stage + ".started"), "{}\n");
}

StageOutcome ExperimentRunner::finish_stage(const std::string& stage, size_t records,
                                            std::vector<StageSkip> skips, double wall_ms) const {
  json obj;
  obj["stage"] = stage;
  obj["records"] = records;
  obj["wall_ms"] = wall_ms;
  json skips_json = json::array();
  for (const auto& skip : skips) {
    skips_json.push_back({{"key", skip.key}, {"reason", skip.reason}});
  }
  obj["skips"] = skips_json;
  write_file_atomic(stage_marker(stage), obj.dump(2) + "\n");

  StageOutcome outcome;
  outcome.stage = stage;
  outcome.record_count = records;
  outcome.skips = std::move(skips);
  return outcome;
}

StageOutcome ExperimentRunner::ensure_perturbed() {
  const std::string stage = "perturb";
  if (!config_.perturbed_path.empty()) {
    if (!std::filesystem::exists(config_.perturbed_path)) {
      raise(Errc::io, "perturbed dataset not found: " + config_.perturbed_path);
    }
    StageOutcome outcome;
    outcome.stage = stage;
    outcome.reused = true;  // provided externally
    return outcome;
  }
  if (stage_done(stage) && std::filesystem::exists(perturbed_dataset_path())) {
    return reuse_outcome(stage);
  }

  StageTimer timer;
  mark_started(stage);
  const Loaded& data = loaded();

  bool needs_chat = std::any_of(config_.kinds.begin(), config_.kinds.end(), is_prompted_kind);
  PerturbationOptions options;
  options.kinds = config_.kinds;
  options.base_seed = config_.seed;
  options.chat_model = config_.perturber.model;
  options.retries = config_.perturber.retries;
  options.concurrency = config_.concurrency;

  PerturbationDataset dataset =
      build_perturbation_dataset(data.queries, options, needs_chat ? &perturber_endpoint() : nullptr);
  save_perturbed_dataset(dataset.records, perturbed_dataset_path());

  std::vector<StageSkip> skips;
  for (const auto& skip : dataset.skips) {
    skips.push_back({skip.query_id + "|" + kind_name(skip.kind), skip.reason});
  }
  return finish_stage(stage, dataset.records.size(), std::move(skips), timer.elapsed_ms());
}

StageOutcome ExperimentRunner::ensure_retriever() {
  const std::string stage = "retriever_setup";
  const RetrieverSpec& spec = config_.retriever;

  if (spec.type != RetrieverType::dense) {
    if (!spec.index_dir.empty()) {
      if (!std::filesystem::exists(std::filesystem::path(spec.index_dir) / "index.bin")) {
        raise(Errc::io, "index not found under " + spec.index_dir);
      }
      StageOutcome outcome;
      outcome.stage = stage;
      outcome.reused = true;
      return outcome;
    }
    if (stage_done(stage)) return reuse_outcome(stage);
    StageTimer timer;
    mark_started(stage);
    const Loaded& data = loaded();
    auto index =
        InvertedIndex::build(data.corpus, spec.type == RetrieverType::sparse_multi);
    index.save(run_dir_ / "index");
    return finish_stage(stage, index.doc_count(), {}, timer.elapsed_ms());
  }

  if (!spec.matrix_path.empty()) {
    if (!std::filesystem::exists(spec.matrix_path)) {
      raise(Errc::io, "embedding matrix not found: " + spec.matrix_path);
    }
    StageOutcome outcome;
    outcome.stage = stage;
    outcome.reused = true;
    return outcome;
  }
  if (stage_done(stage)) return reuse_outcome(stage);
  StageTimer timer;
  mark_started(stage);
  const Loaded& data = loaded();
  EmbedClientConfig embed_config;
  embed_config.endpoint_url = spec.embed_endpoint;
  embed_config.model = spec.embed_model;
  embed_config.batch_size = spec.batch_size;
  embed_config.query_prefix = spec.query_prefix.value_or(default_query_prefix(spec.embed_model));
  embed_config.normalize = spec.normalize;
  auto matrix = embed_corpus(data.corpus, embed_config, embedding_endpoint(),
                             run_dir_ / "matrix.bin");
  return finish_stage(stage, matrix.count(), {}, timer.elapsed_ms());
}

StageOutcome ExperimentRunner::run_retrieval() {
  const std::string stage = "retrieval";
  if (stage_done(stage)) return reuse_outcome(stage);

  StageTimer timer;
  mark_started(stage);
  const Loaded& data = loaded();
  auto records = load_perturbed_dataset(perturbed_dataset_path());
  std::sort(records.begin(), records.end(), [](const PerturbedQuery& a, const PerturbedQuery& b) {
    return QueryKey{a.origin_id, a.kind, a.variant} < QueryKey{b.origin_id, b.kind, b.variant};
  });

  std::vector<StageSkip> skips;
  std::vector<const PerturbedQuery*> items;
  for (const auto& rec : records) {
    auto it = data.gold.find(rec.origin_id);
    if (it == data.gold.end() || it->second.empty()) {
      skips.push_back({QueryKey{rec.origin_id, rec.kind, rec.variant}.encode(),
                       "no gold documents in qrels"});
      continue;
    }
    items.push_back(&rec);
  }

  auto k_values = retrieval_k_values(config_);
  size_t max_k = k_values.empty() ? static_cast<size_t>(config_.k)
                                  : static_cast<size_t>(k_values.back());
  std::vector<std::vector<ScoredDoc>> results(items.size());

  if (config_.retriever.type == RetrieverType::dense) {
    auto matrix = EmbeddingMatrix::load(config_.retriever.matrix_path.empty()
                                            ? run_dir_ / "matrix.bin"
                                            : std::filesystem::path(config_.retriever.matrix_path));
    // Embed each distinct query text once, in deterministic batches.
    std::vector<std::string> texts;
    std::unordered_map<std::string, size_t> text_index;
    for (const auto* rec : items) {
      if (text_index.try_emplace(rec->text, texts.size()).second) texts.push_back(rec->text);
    }
    std::vector<std::vector<double>> vectors(texts.size());
    int batch = std::max(1, config_.retriever.batch_size);
    for (size_t start = 0; start < texts.size(); start += static_cast<size_t>(batch)) {
      size_t end = std::min(texts.size(), start + static_cast<size_t>(batch));
      std::vector<std::string> inputs;
      for (size_t i = start; i < end; ++i) {
        const std::string& prefix = matrix.query_prefix();
        inputs.push_back(prefix.empty() ? texts[i] : prefix + " " + texts[i]);
      }
      auto embedded = embedding_endpoint().embed(inputs, matrix.model());
      for (size_t i = 0; i < embedded.size(); ++i) vectors[start + i] = std::move(embedded[i]);
    }
    if (matrix.normalized()) {
      for (auto& vec : vectors) {
        double norm_sq = 0.0;
        for (double v : vec) norm_sq += v * v;
        if (norm_sq > 0.0) {
          double inv = 1.0 / std::sqrt(norm_sq);
          for (double& v : vec) v *= inv;
        }
      }
    }
    auto errors = parallel_for(items.size(), config_.concurrency, [&](size_t i) {
      results[i] = matrix.search_vector(vectors[text_index.at(items[i]->text)], max_k);
    });
    for (const auto& error : errors) {
      if (!error.empty()) raise(Errc::failure, "dense retrieval failed: " + error);
    }
  } else {
    auto index = InvertedIndex::load(config_.retriever.index_dir.empty()
                                         ? run_dir_ / "index"
                                         : std::filesystem::path(config_.retriever.index_dir));
    Bm25Params params{config_.retriever.k1, config_.retriever.b};
    SearchMode mode = config_.retriever.type == RetrieverType::sparse_multi
                          ? SearchMode::multi_field
                          : SearchMode::flat;
    auto errors = parallel_for(items.size(), config_.concurrency, [&](size_t i) {
      results[i] = index.search(params, items[i]->text, max_k, mode).docs;
    });
    for (const auto& error : errors) {
      if (!error.empty()) raise(Errc::failure, "sparse retrieval failed: " + error);
    }
  }

  RunFile run;
  std::vector<MetricRecord> metrics;
  for (size_t i = 0; i < items.size(); ++i) {
    const PerturbedQuery& rec = *items[i];
    QueryKey key{rec.origin_id, rec.kind, rec.variant};
    run[key.encode()] = results[i];
    std::vector<std::string> retrieved;
    retrieved.reserve(results[i].size());
    for (const auto& doc : results[i]) retrieved.push_back(doc.doc_id);
    const auto& gold = data.gold.at(rec.origin_id);
    for (int k : k_values) {
      metrics.push_back({key, Setting::retrieval, "recall@" + std::to_string(k),
                         recall_at_k(retrieved, gold, static_cast<size_t>(k))});
      metrics.push_back({key, Setting::retrieval, "precision@" + std::to_string(k),
                         precision_at_k(retrieved, gold, static_cast<size_t>(k))});
    }
  }

  save_runfile(run, run_dir_ / "retrieval.run");
  save_metrics(metrics, run_dir_ / "metrics_retrieval.jsonl");
  return finish_stage(stage, items.size(), std::move(skips), timer.elapsed_ms());
}

StageOutcome ExperimentRunner::run_generation(Setting setting) {
  if (setting == Setting::retrieval) {
    raise(Errc::invalid_argument, "run_generation takes closed_book, oracle or rag");
  }
  const std::string stage = setting_name(setting);
  if (stage_done(stage)) return reuse_outcome(stage);
  if (setting == Setting::rag && !stage_done("retrieval")) {
    raise(Errc::missing_stage, "rag requires a completed retrieval stage for this config");
  }

  StageTimer timer;
  mark_started(stage);
  const Loaded& data = loaded();
  auto records = load_perturbed_dataset(perturbed_dataset_path());
  std::sort(records.begin(), records.end(), [](const PerturbedQuery& a, const PerturbedQuery& b) {
    return QueryKey{a.origin_id, a.kind, a.variant} < QueryKey{b.origin_id, b.kind, b.variant};
  });

  RunFile run;
  if (setting == Setting::rag) run = load_runfile(run_dir_ / "retrieval.run");

  std::vector<StageSkip> skips;
  std::vector<const PerturbedQuery*> items;
  for (const auto& rec : records) {
    QueryKey key{rec.origin_id, rec.kind, rec.variant};
    if (!data.answers.contains(rec.origin_id)) {
      skips.push_back({key.encode(), "no gold answers"});
      continue;
    }
    if (setting != Setting::closed_book) {
      auto it = data.gold.find(rec.origin_id);
      if (it == data.gold.end() || it->second.empty()) {
        skips.push_back({key.encode(), "no gold documents in qrels"});
        continue;
      }
    }
    items.push_back(&rec);
  }

  GenerationCache cache(config_.cache_dir.empty() ? run_dir_ / "cache"
                                                  : std::filesystem::path(config_.cache_dir));
  ChatEndpoint& chat = generator_endpoint();

  auto context_docs = [&](const PerturbedQuery& rec) {
    std::vector<Document> docs;
    if (setting == Setting::closed_book) return docs;
    std::vector<std::string> ids;
    if (setting == Setting::oracle) {
      ids = gold_docs_ranked(data.qrels, rec.origin_id);
    } else {
      QueryKey key{rec.origin_id, rec.kind, rec.variant};
      auto it = run.find(key.encode());
      if (it != run.end()) {
        size_t depth = std::min(static_cast<size_t>(config_.k), it->second.size());
        for (size_t i = 0; i < depth; ++i) ids.push_back(it->second[i].doc_id);
      }
    }
    for (const auto& id : ids) {
      auto it = data.corpus_by_id.find(id);
      if (it == data.corpus_by_id.end()) {
        raise(Errc::invalid_argument, "context references unknown document " + id);
      }
      Document doc = *it->second;
      doc.text = truncate_doc(doc.text, config_.generator.doc_word_cap);
      docs.push_back(std::move(doc));
    }
    return docs;
  };

  std::vector<GenerationRecord> outputs(items.size());
  auto errors = parallel_for(items.size(), config_.concurrency, [&](size_t i) {
    const PerturbedQuery& rec = *items[i];
    QueryKey key{rec.origin_id, rec.kind, rec.variant};
    std::vector<Document> docs = context_docs(rec);
    PromptBundle bundle;
    if (setting == Setting::closed_book) {
      bundle = build_prompt(rec.text, nullptr);
    } else {
      docs = fit_docs_to_budget(rec.text, std::move(docs), config_.generator);
      bundle = build_prompt(rec.text, &docs);
    }
    GenerationRecord out;
    out.key = key;
    out.setting = setting;
    for (const auto& doc : docs) out.doc_ids.push_back(doc.id);
    out.cache_key = cache_key(config_.generator, bundle);
    out.output = generate(bundle, config_.generator, cache, chat, key.encode());
    outputs[i] = std::move(out);
  });

  std::vector<GenerationRecord> kept;
  std::vector<MetricRecord> metrics;
  for (size_t i = 0; i < items.size(); ++i) {
    QueryKey key{items[i]->origin_id, items[i]->kind, items[i]->variant};
    if (!errors[i].empty()) {
      skips.push_back({key.encode(), errors[i]});
      continue;
    }
    const auto& answers = data.answers.at(items[i]->origin_id);
    metrics.push_back({key, setting, "match",
                       static_cast<double>(match_metric(outputs[i].output, answers))});
    metrics.push_back({key, setting, "unigram_f1", unigram_f1(outputs[i].output, answers)});
    kept.push_back(std::move(outputs[i]));
  }

  std::ostringstream gen_out;
  for (const auto& rec : kept) gen_out << generation_to_json(rec).dump() << "\n";
  write_file_atomic(run_dir_ / ("gen_" + stage + ".jsonl"), gen_out.str());
  save_metrics(metrics, run_dir_ / ("metrics_" + stage + ".jsonl"));
  return finish_stage(stage, kept.size(), std::move(skips), timer.elapsed_ms());
}

StageOutcome ExperimentRunner::run_correlation() {
  const std::string stage = "correlate";
  if (stage_done(stage)) return reuse_outcome(stage);

  StageTimer timer;
  mark_started(stage);
  std::vector<MetricRecord> all;
  for (const char* name : {"retrieval", "closed_book", "oracle", "rag"}) {
    auto path = run_dir_ / ("metrics_" + std::string(name) + ".jsonl");
    if (!std::filesystem::exists(path)) {
      raise(Errc::missing_stage,
            std::string("correlation requires metric records from the ") + name + " stage");
    }
    auto records = load_metrics(path);
    all.insert(all.end(), records.begin(), records.end());
  }

  auto report =
      correlation_report(all, "recall@" + std::to_string(config_.k), "match");

  json obj;
  for (const auto& [kind, row] : report.cells) {
    json row_json;
    for (const auto& [pairing, cell] : row) {
      row_json[pairing_name(pairing)] = {{"r", cell.r},
                                         {"pairs", cell.pair_count},
                                         {"dropped", cell.dropped},
                                         {"degenerate", cell.degenerate},
                                         {"insufficient", cell.insufficient}};
    }
    obj[kind_name(kind)] = std::move(row_json);
  }
  write_file_atomic(run_dir_ / "correlations.json", obj.dump(2) + "\n");
  return finish_stage(stage, report.cells.size() * 3, {}, timer.elapsed_ms());
}

StageOutcome ExperimentRunner::emit_report() {
  const std::string stage = "report";
  if (stage_done(stage)) return reuse_outcome(stage);

  StageTimer timer;
  mark_started(stage);

  std::vector<MetricRecord> all;
  std::vector<Setting> present;
  for (Setting setting :
       {Setting::retrieval, Setting::closed_book, Setting::oracle, Setting::rag}) {
    auto path = run_dir_ / ("metrics_" + std::string(setting_name(setting)) + ".jsonl");
    if (!std::filesystem::exists(path)) continue;
    auto records = load_metrics(path);
    if (!records.empty()) present.push_back(setting);
    all.insert(all.end(), records.begin(), records.end());
  }
  if (all.empty()) raise(Errc::missing_stage, "no metric records to report");

  auto primary_metric = [&](Setting setting) {
    return setting == Setting::retrieval ? "recall@" + std::to_string(config_.k)
                                         : std::string("match");
  };
  auto expected_variants = [](Kind kind) { return kind == Kind::original ? 1 : kVariantsPerKind; };

  std::vector<Kind> kinds_present;
  for (Kind kind : kKindOrder) {
    bool found = std::any_of(all.begin(), all.end(),
                             [&](const MetricRecord& rec) { return rec.key.kind == kind; });
    if (found) kinds_present.push_back(kind);
  }

  std::filesystem::path report_dir = run_dir_ / "report";
  std::filesystem::create_directories(report_dir);
  size_t files = 0;

  // Per-kind means, one column per setting (Table-2-style layout).
  {
    std::ostringstream csv;
    csv << "kind";
    for (Setting setting : present) csv << "," << setting_name(setting);
    csv << "\n";
    for (Kind kind : kinds_present) {
      csv << kind_name(kind);
      for (Setting setting : present) {
        auto agg = aggregate(all, setting, primary_metric(setting), kind,
                             expected_variants(kind));
        csv << ",";
        if (agg.origin_count > 0) csv << format_double(agg.mean);
      }
      csv << "\n";
    }
    write_file_atomic(report_dir / "means_by_kind.csv", csv.str());
    ++files;
  }

  // Tidy per-(setting, metric, kind) series for external plotting.
  {
    std::set<std::pair<Setting, std::string>> metric_slices;
    for (const auto& rec : all) metric_slices.insert({rec.setting, rec.metric});
    std::ostringstream csv;
    csv << "setting,metric,kind,mean,origins,complete\n";
    for (Setting setting : present) {
      for (const auto& [slice_setting, metric] : metric_slices) {
        if (slice_setting != setting) continue;
        for (Kind kind : kinds_present) {
          auto agg = aggregate(all, setting, metric, kind, expected_variants(kind));
          if (agg.origin_count == 0) continue;
          csv << setting_name(setting) << "," << metric << "," << kind_name(kind) << ","
              << format_double(agg.mean) << "," << agg.origin_count << ","
              << (agg.complete ? "true" : "false") << "\n";
        }
      }
    }
    write_file_atomic(report_dir / "series_means.csv", csv.str());
    ++files;
  }

  // Recall-vs-k curves per kind.
  if (std::find(present.begin(), present.end(), Setting::retrieval) != present.end()) {
    std::ostringstream csv;
    csv << "kind,k,mean_recall\n";
    for (Kind kind : kinds_present) {
      for (int k : retrieval_k_values(config_)) {
        auto agg = aggregate(all, Setting::retrieval, "recall@" + std::to_string(k), kind,
                             expected_variants(kind));
        if (agg.origin_count == 0) continue;
        csv << kind_name(kind) << "," << k << "," << format_double(agg.mean) << "\n";
      }
    }
    write_file_atomic(report_dir / "series_recall_vs_k.csv", csv.str());
    ++files;
  }

  // Correlation grid (Table-3-style layout), when the correlate stage ran.
  json correlations;
  if (std::filesystem::exists(run_dir_ / "correlations.json")) {
    correlations = json::parse(read_file(run_dir_ / "correlations.json"));
    std::ostringstream csv;
    csv << "kind,RET,CB,OR,pairs\n";
    for (Kind kind : kKindOrder) {
      if (kind == Kind::original) continue;
      if (!correlations.contains(kind_name(kind))) continue;
      const auto& row = correlations[kind_name(kind)];
      csv << kind_name(kind);
      size_t pairs = 0;
      for (const char* pairing : {"RET", "CB", "OR"}) {
        const auto& cell = row.at(pairing);
        csv << ",";
        if (cell.value("insufficient", false)) {
          csv << "insufficient";
        } else if (cell.value("degenerate", false)) {
          csv << "degenerate";
        } else {
          csv << format_double(cell.value("r", 0.0));
        }
        pairs = std::max(pairs, cell.value("pairs", static_cast<size_t>(0)));
      }
      csv << "," << pairs << "\n";
    }
    write_file_atomic(report_dir / "correlations.csv", csv.str());
    ++files;
  }

  // Machine-readable rollup.
  {
    json summary;
    summary["config_hash"] = config_.config_hash();
    summary["k"] = config_.k;
    json means;
    for (Setting setting : present) {
      json per_kind;
      for (Kind kind : kinds_present) {
        auto agg = aggregate(all, setting, primary_metric(setting), kind,
                             expected_variants(kind));
        if (agg.origin_count == 0) continue;
        per_kind[kind_name(kind)] = {{"mean", agg.mean},
                                     {"origins", agg.origin_count},
                                     {"complete", agg.complete}};
      }
      means[setting_name(setting)] = {{"metric", primary_metric(setting)},
                                      {"by_kind", per_kind}};
    }
    summary["means"] = means;
    if (!correlations.is_null()) summary["correlations"] = correlations;
    json stage_skips;
    for (const char* name : {"perturb", "retrieval", "closed_book", "oracle", "rag"}) {
      auto marker = stage_marker(name);
      if (!std::filesystem::exists(marker)) continue;
      json obj = json::parse(read_file(marker), nullptr, false);
      if (!obj.is_discarded() && obj.contains("skips")) stage_skips[name] = obj["skips"];
    }
    summary["stage_skips"] = stage_skips;
    write_file_atomic(report_dir / "summary.json", summary.dump(2) + "\n");
    ++files;
  }

  return finish_stage(stage, files, {}, timer.elapsed_ms());
}

std::vector<StageOutcome> ExperimentRunner::run_all() {
  std::vector<StageOutcome> outcomes;
  outcomes.push_back(ensure_perturbed());
  outcomes.push_back(ensure_retriever());
  outcomes.push_back(run_retrieval());
  for (Setting setting : {Setting::closed_book, Setting::oracle, Setting::rag}) {
    if (std::find(config_.settings.begin(), config_.settings.end(), setting) !=
        config_.settings.end()) {
      outcomes.push_back(run_generation(setting));
    }
  }
  bool can_correlate = true;
  for (Setting setting : {Setting::closed_book, Setting::oracle, Setting::rag}) {
    if (std::find(config_.settings.begin(), config_.settings.end(), setting) ==
        config_.settings.end()) {
      can_correlate = false;
    }
  }
  if (can_correlate) outcomes.push_back(run_correlation());
  outcomes.push_back(emit_report());
  return outcomes;
}

int exit_code_for(const std::vector<StageOutcome>& outcomes) {
  for (const auto& outcome : outcomes) {
    if (!outcome.skips.empty()) return 2;
  }
  return 0;
}

}  // namespace ragprobe
