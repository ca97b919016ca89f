#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/endpoints.hpp"
#include "ragprobe/generation.hpp"
#include "ragprobe/types.hpp"

namespace ragprobe {

inline constexpr const char* kCodeVersion = "0.1.0";

enum class RetrieverType {
  sparse_flat,
  sparse_multi,
  dense,
};

struct RetrieverSpec {
  RetrieverType type = RetrieverType::sparse_flat;
  std::string index_dir;    // sparse; built under the run dir when empty
  std::string matrix_path;  // dense; built under the run dir when empty
  double k1 = 0.9;
  double b = 0.4;
  std::string embed_endpoint;  // dense only
  std::string embed_model;
  std::optional<std::string> query_prefix;  // default derived from the model name
  bool normalize = true;
  int batch_size = 16;
};

struct PerturberSpec {
  std::string endpoint;  // chat endpoint used to generate prompted kinds
  std::string model;
  int retries = 3;
};

// Full pipeline configuration. Loaded from a JSON file; endpoint URLs and
// credentials can be overridden with RAGPROBE_CHAT_ENDPOINT,
// RAGPROBE_EMBED_ENDPOINT, RAGPROBE_PERTURB_ENDPOINT and RAGPROBE_API_KEY.
struct ExperimentConfig {
  std::string corpus_path;
  std::string queries_path;
  std::string qrels_path;
  std::string answers_path;
  std::string perturbed_path;  // optional; generated into the run dir when empty

  std::vector<Kind> kinds = {Kind::redundancy, Kind::formal_tone, Kind::ambiguity, Kind::typo_10,
                             Kind::typo_25};
  RetrieverSpec retriever;
  GenerationConfig generator;
  PerturberSpec perturber;
  std::vector<Setting> settings = {Setting::closed_book, Setting::oracle, Setting::rag};
  int k = 5;                                          // context depth for RAG
  std::vector<int> k_grid = {1, 5, 10, 20, 50, 100};  // retrieval curve grid
  uint64_t seed = 0;
  int concurrency = 4;
  std::string out_dir = "runs";
  std::string cache_dir;  // default: <run_dir>/cache

  static ExperimentConfig load(const std::filesystem::path& path);

  /// Content hash over everything that determines outputs (datasets, models,
  /// parameters, seeds). Transport URLs and execution knobs are excluded, so
  /// a rerun against a relocated endpoint resumes the same run directory.
  std::string config_hash() const;
};

struct StageSkip {
  std::string key;  // encoded query key or query id
  std::string reason;
};

struct StageOutcome {
  std::string stage;
  bool reused = false;  // completion marker was already present
  size_t record_count = 0;
  std::vector<StageSkip> skips;
};

/// Orchestrates the stage pipeline under a run directory keyed by the config
/// hash. Every stage writes its outputs atomically, then a completion marker;
/// rerunning a completed stage is a no-op, and an interrupted stage restarts
/// cleanly (generation redoes work through the response cache).
class ExperimentRunner {
 public:
  explicit ExperimentRunner(ExperimentConfig config);

  const std::filesystem::path& run_dir() const { return run_dir_; }
  const ExperimentConfig& config() const { return config_; }

  StageOutcome ensure_perturbed();
  StageOutcome ensure_retriever();
  StageOutcome run_retrieval();
  StageOutcome run_generation(Setting setting);  // closed_book | oracle | rag
  StageOutcome run_correlation();
  StageOutcome emit_report();

  /// perturb -> retriever setup -> retrieval -> generation settings ->
  /// correlate (when all four record sets exist) -> report.
  std::vector<StageOutcome> run_all();

  // Endpoint injection points; HTTP clients are built from the config when
  // unset. Tests plug deterministic fakes in here.
  void set_generator_endpoint(std::shared_ptr<ChatEndpoint> endpoint);
  void set_perturber_endpoint(std::shared_ptr<ChatEndpoint> endpoint);
  void set_embedding_endpoint(std::shared_ptr<EmbeddingEndpoint> endpoint);

  std::filesystem::path perturbed_dataset_path() const;
  std::filesystem::path stage_marker(const std::string& stage) const;

 private:
  struct Loaded;

  ChatEndpoint& generator_endpoint();
  ChatEndpoint& perturber_endpoint();
  EmbeddingEndpoint& embedding_endpoint();
  const Loaded& loaded();

  bool stage_done(const std::string& stage) const;
  StageOutcome reuse_outcome(const std::string& stage) const;
  void mark_started(const std::string& stage) const;
  StageOutcome finish_stage(const std::string& stage, size_t records,
                            std::vector<StageSkip> skips, double wall_ms) const;

  ExperimentConfig config_;
  std::filesystem::path run_dir_;
  std::shared_ptr<ChatEndpoint> generator_endpoint_;
  std::shared_ptr<ChatEndpoint> perturber_endpoint_;
  std::shared_ptr<EmbeddingEndpoint> embedding_endpoint_;
  std::shared_ptr<Loaded> loaded_;
};

/// Exit-code semantics shared by the CLI drivers: 0 clean, 2 when any stage
/// skipped samples, 1 on hard failure (thrown).
int exit_code_for(const std::vector<StageOutcome>& outcomes);

}  // namespace ragprobe
