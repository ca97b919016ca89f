#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ragprobe/runner.hpp"

namespace ragprobe::drivers {

// Command entry points behind the CLI subcommands. Each returns the stage
// outcomes it produced; exit_code_for() maps them to process exit codes.

std::vector<StageOutcome> perturb(const std::string& queries_path, const std::string& kinds_csv,
                                  uint64_t seed, const std::string& out_path,
                                  const std::string& chat_endpoint, const std::string& chat_model,
                                  int concurrency = 4);

std::vector<StageOutcome> index_build(const std::string& corpus_path,
                                      const std::string& fields_csv, const std::string& out_dir);

std::vector<StageOutcome> index_search(const std::string& index_dir,
                                       const std::string& queries_path, size_t k, double k1,
                                       double b, bool multi_field,
                                       const std::string& out_runfile);

std::vector<StageOutcome> embed(const std::string& corpus_path, const std::string& endpoint,
                                const std::string& model, int batch_size, bool normalize,
                                const std::string* query_prefix, const std::string& out_path);

std::vector<StageOutcome> dense_search(const std::string& matrix_path,
                                       const std::string& queries_path, size_t k,
                                       const std::string& endpoint,
                                       const std::string& out_runfile);

std::vector<StageOutcome> quality(const std::string& queries_path,
                                  const std::string& perturbed_path, const std::string& endpoint,
                                  const std::string& model, const std::string& out_csv);

std::vector<StageOutcome> pca(const std::string& vectors_path, const std::string& out_csv);

std::vector<StageOutcome> retrieve(const std::string& config_path);
std::vector<StageOutcome> run_setting(const std::string& config_path, const std::string& setting);
std::vector<StageOutcome> correlate(const std::string& config_path);
std::vector<StageOutcome> report(const std::string& config_path);
std::vector<StageOutcome> all(const std::string& config_path);

}  // namespace ragprobe::drivers
