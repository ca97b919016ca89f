#pragma once

#include <map>
#include <string>
#include <vector>

#include "ragprobe/endpoints.hpp"
#include "ragprobe/prompts.hpp"
#include "ragprobe/types.hpp"
#include "ragprobe/typo.hpp"

namespace ragprobe {

inline constexpr int kVariantsPerKind = 5;

/// Asks the chat endpoint for spec.output_per_sample paraphrases in one
/// completion; the response is split on newlines, trimmed, and empties
/// dropped. Wrong cardinality is retried up to `retries` times before
/// failing.
std::vector<PerturbedQuery> generate_prompted(const Query& query, const PromptSpec& spec,
                                              ChatEndpoint& chat, const std::string& model,
                                              int retries = 3);

struct SkipEntry {
  std::string query_id;
  Kind kind = Kind::original;
  std::string reason;
};

struct PerturbationDataset {
  std::vector<PerturbedQuery> records;
  std::vector<SkipEntry> skips;
};

struct PerturbationOptions {
  std::vector<Kind> kinds;  // perturbed kinds to generate; originals always emitted
  uint64_t base_seed = 0;
  double typo10_rate = 0.10;
  double typo25_rate = 0.25;
  int output_per_sample = kVariantsPerKind;
  std::string chat_model;
  int retries = 3;
  int concurrency = 4;
};

/// One original record per query plus five variants per requested kind.
/// Per-(query, kind) failures are collected in the skip list; the build never
/// aborts on them. `chat` may be null when no prompted kind is requested.
PerturbationDataset build_perturbation_dataset(const std::vector<Query>& queries,
                                               const PerturbationOptions& options,
                                               ChatEndpoint* chat);

struct QualityStats {
  Kind kind = Kind::original;
  double mean_cosine_similarity = 0.0;
  std::vector<double> per_sample_similarities;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Semantic-similarity check: cosine between each variant's embedding and its
/// origin's embedding, averaged per kind. Original-kind records are skipped.
std::vector<QualityStats> quality_similarity(const std::vector<Query>& originals,
                                             const std::vector<PerturbedQuery>& perturbed,
                                             EmbeddingEndpoint& embed, const std::string& model,
                                             int batch_size = 16);

}  // namespace ragprobe
