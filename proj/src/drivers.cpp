#include "ragprobe/drivers.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ragprobe/bm25.hpp"
#include "ragprobe/dataset.hpp"
#include "ragprobe/dense.hpp"
#include "ragprobe/error.hpp"
#include "ragprobe/pca.hpp"
#include "ragprobe/perturb.hpp"
#include "ragprobe/runfile.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe::drivers {

namespace {

using nlohmann::json;

StageOutcome outcome_of(const std::string& stage, size_t records,
                        std::vector<StageSkip> skips = {}) {
  StageOutcome outcome;
  outcome.stage = stage;
  outcome.record_count = records;
  outcome.skips = std::move(skips);
  return outcome;
}

// Accepts either a plain queries file ({"_id", "text"}) or a perturbed
// dataset ({"origin_id", "kind", ...}); returns (display id, text) pairs.
std::vector<std::pair<std::string, std::string>> load_search_inputs(const std::string& path) {
  auto lines = read_lines(path);
  bool perturbed = false;
  for (const auto& line : lines) {
    if (trim(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (!obj.is_discarded() && obj.is_object()) perturbed = obj.contains("origin_id");
    break;
  }
  std::vector<std::pair<std::string, std::string>> inputs;
  if (perturbed) {
    for (const auto& rec : load_perturbed_dataset(path)) {
      inputs.emplace_back(QueryKey{rec.origin_id, rec.kind, rec.variant}.encode(), rec.text);
    }
  } else {
    for (const auto& query : load_queries(path)) {
      inputs.emplace_back(query.id, query.text);
    }
  }
  return inputs;
}

bool parse_fields_csv(const std::string& fields_csv) {
  bool content = false;
  bool title = false;
  for (const auto& field : split(fields_csv, ',')) {
    std::string name = trim(field);
    if (name == "content") {
      content = true;
    } else if (name == "title") {
      title = true;
    } else if (!name.empty()) {
      raise(Errc::invalid_argument, "unknown index field: " + name);
    }
  }
  if (!content) raise(Errc::invalid_argument, "index fields must include 'content'");
  return title;
}

}  // namespace

std::vector<StageOutcome> perturb(const std::string& queries_path, const std::string& kinds_csv,
                                  uint64_t seed, const std::string& out_path,
                                  const std::string& chat_endpoint, const std::string& chat_model,
                                  int concurrency) {
  auto queries = load_queries(queries_path);

  PerturbationOptions options;
  for (const auto& name : split(kinds_csv, ',')) {
    std::string cleaned = trim(name);
    if (!cleaned.empty()) options.kinds.push_back(kind_from_name(cleaned));
  }
  options.base_seed = seed;
  options.chat_model = chat_model;
  options.concurrency = concurrency;

  bool needs_chat = std::any_of(options.kinds.begin(), options.kinds.end(), is_prompted_kind);
  std::unique_ptr<ChatEndpoint> chat;
  if (needs_chat) {
    if (chat_endpoint.empty()) {
      raise(Errc::invalid_argument,
            "prompted kinds requested; pass --chat-endpoint and --chat-model");
    }
    chat = make_http_chat_endpoint(chat_endpoint, http_options_from_env());
  }

  auto dataset = build_perturbation_dataset(queries, options, chat.get());
  save_perturbed_dataset(dataset.records, out_path);

  // Skipped (query, kind) pairs land next to the dataset for inspection.
  std::vector<StageSkip> skips;
  std::ostringstream skip_report;
  for (const auto& skip : dataset.skips) {
    skips.push_back({skip.query_id + "|" + kind_name(skip.kind), skip.reason});
    skip_report << json{{"query_id", skip.query_id},
                        {"kind", kind_name(skip.kind)},
                        {"reason", skip.reason}}
                       .dump()
                << "\n";
  }
  if (!skips.empty()) {
    write_file_atomic(out_path + ".skips.jsonl", skip_report.str());
  }
  return {outcome_of("perturb", dataset.records.size(), std::move(skips))};
}

std::vector<StageOutcome> index_build(const std::string& corpus_path,
                                      const std::string& fields_csv, const std::string& out_dir) {
  bool with_title = parse_fields_csv(fields_csv);
  auto corpus = load_corpus(corpus_path);
  auto index = InvertedIndex::build(corpus, with_title);
  index.save(out_dir);
  return {outcome_of("index_build", index.doc_count())};
}

std::vector<StageOutcome> index_search(const std::string& index_dir,
                                       const std::string& queries_path, size_t k, double k1,
                                       double b, bool multi_field,
                                       const std::string& out_runfile) {
  auto index = InvertedIndex::load(index_dir);
  Bm25Params params{k1, b};
  SearchMode mode = multi_field ? SearchMode::multi_field : SearchMode::flat;

  RunFile run;
  std::vector<StageSkip> skips;
  for (const auto& [id, text] : load_search_inputs(queries_path)) {
    auto result = index.search(params, text, k, mode);
    if (result.empty_query) {
      skips.push_back({id, "query analyzed to zero tokens"});
    }
    run[id] = std::move(result.docs);
  }
  save_runfile(run, out_runfile);
  return {outcome_of("index_search", run.size(), std::move(skips))};
}

std::vector<StageOutcome> embed(const std::string& corpus_path, const std::string& endpoint,
                                const std::string& model, int batch_size, bool normalize,
                                const std::string* query_prefix, const std::string& out_path) {
  auto corpus = load_corpus(corpus_path);
  EmbedClientConfig config;
  config.endpoint_url = endpoint;
  config.model = model;
  config.batch_size = batch_size;
  config.normalize = normalize;
  config.query_prefix = query_prefix ? *query_prefix : default_query_prefix(model);
  auto http = make_http_embedding_endpoint(endpoint, http_options_from_env());
  auto matrix = embed_corpus(corpus, config, *http, out_path);
  return {outcome_of("embed", matrix.count())};
}

std::vector<StageOutcome> dense_search(const std::string& matrix_path,
                                       const std::string& queries_path, size_t k,
                                       const std::string& endpoint,
                                       const std::string& out_runfile) {
  auto matrix = EmbeddingMatrix::load(matrix_path);
  auto http = make_http_embedding_endpoint(endpoint, http_options_from_env());

  RunFile run;
  for (const auto& [id, text] : load_search_inputs(queries_path)) {
    run[id] = matrix.search(text, *http, k);
  }
  save_runfile(run, out_runfile);
  return {outcome_of("dense_search", run.size())};
}

std::vector<StageOutcome> quality(const std::string& queries_path,
                                  const std::string& perturbed_path, const std::string& endpoint,
                                  const std::string& model, const std::string& out_csv) {
  auto queries = load_queries(queries_path);
  auto perturbed = load_perturbed_dataset(perturbed_path);
  auto http = make_http_embedding_endpoint(endpoint, http_options_from_env());
  auto stats = quality_similarity(queries, perturbed, *http, model);

  std::ostringstream csv;
  csv << "kind,mean_cosine_similarity,samples\n";
  for (const auto& row : stats) {
    csv << kind_name(row.kind) << "," << format_double(row.mean_cosine_similarity) << ","
        << row.per_sample_similarities.size() << "\n";
  }
  write_file_atomic(out_csv, csv.str());
  return {outcome_of("quality", stats.size())};
}

std::vector<StageOutcome> pca(const std::string& vectors_path, const std::string& out_csv) {
  // Input: one {"id": ..., "vector": [...]} object per line.
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  size_t line_no = 0;
  for (const auto& line : read_lines(vectors_path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("vector")) {
      raise(Errc::parse,
            vectors_path + ":" + std::to_string(line_no) + ": expected {id, vector} record");
    }
    ids.push_back(obj.value("id", std::to_string(line_no)));
    rows.push_back(obj["vector"].get<std::vector<double>>());
  }

  auto result = pca_project(rows);
  std::ostringstream csv;
  csv << "# explained_variance," << format_double(result.explained[0]) << ","
      << format_double(result.explained[1]) << "\n";
  csv << "id,pc1,pc2\n";
  for (size_t i = 0; i < ids.size(); ++i) {
    csv << ids[i] << "," << format_double(result.coords[i][0]) << ","
        << format_double(result.coords[i][1]) << "\n";
  }
  write_file_atomic(out_csv, csv.str());
  return {outcome_of("pca", ids.size())};
}

std::vector<StageOutcome> retrieve(const std::string& config_path) {
  ExperimentRunner runner(ExperimentConfig::load(config_path));
  std::vector<StageOutcome> outcomes;
  outcomes.push_back(runner.ensure_perturbed());
  outcomes.push_back(runner.ensure_retriever());
  outcomes.push_back(runner.run_retrieval());
  return outcomes;
}

std::vector<StageOutcome> run_setting(const std::string& config_path, const std::string& setting) {
  ExperimentRunner runner(ExperimentConfig::load(config_path));
  std::vector<StageOutcome> outcomes;
  outcomes.push_back(runner.ensure_perturbed());
  Setting parsed = setting_from_name(setting);
  if (parsed == Setting::rag) {
    outcomes.push_back(runner.ensure_retriever());
    outcomes.push_back(runner.run_retrieval());
  }
  outcomes.push_back(runner.run_generation(parsed));
  return outcomes;
}

std::vector<StageOutcome> correlate(const std::string& config_path) {
  ExperimentRunner runner(ExperimentConfig::load(config_path));
  return {runner.run_correlation()};
}

std::vector<StageOutcome> report(const std::string& config_path) {
  ExperimentRunner runner(ExperimentConfig::load(config_path));
  return {runner.emit_report()};
}

std::vector<StageOutcome> all(const std::string& config_path) {
  ExperimentRunner runner(ExperimentConfig::load(config_path));
  return runner.run_all();
}

}  // namespace ragprobe::drivers
