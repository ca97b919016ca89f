#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ragprobe/endpoints.hpp"
#include "ragprobe/types.hpp"

namespace ragprobe {

struct EmbedClientConfig {
  std::string endpoint_url;
  std::string model;
  int batch_size = 16;
  int max_retries = 3;
  std::string query_prefix;  // prepended to query text before embedding
  bool normalize = true;     // false stores raw vectors; search ranks by raw inner product
};

/// Default query-side instruction: the documented passage-search prefix for
/// BGE-family models, empty otherwise.
std::string default_query_prefix(const std::string& model);

/// Row-major matrix of corpus embeddings, L2-normalized on ingest unless the
/// matrix was written with normalize = false. Immutable once loaded.
class EmbeddingMatrix {
 public:
  size_t dim() const { return dim_; }
  size_t count() const { return doc_ids_.size(); }
  bool normalized() const { return normalized_; }
  const std::string& model() const { return model_; }
  const std::string& query_prefix() const { return query_prefix_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const float* row(size_t ordinal) const { return data_.data() + ordinal * dim_; }

  /// Exact top-k by inner product against a prepared query vector (already
  /// prefixed/normalized as the matrix requires). Ties break by doc_id.
  std::vector<ScoredDoc> search_vector(const std::vector<double>& query, size_t k) const;

  /// Embeds `prefix + query_text` via the endpoint, then searches.
  std::vector<ScoredDoc> search(const std::string& query_text, EmbeddingEndpoint& endpoint,
                                size_t k) const;

  /// Versioned binary layout: header (magic, version, flags, dim, count,
  /// model, query prefix), little-endian float32 rows, then the id table.
  void save(const std::filesystem::path& path) const;
  static EmbeddingMatrix load(const std::filesystem::path& path);

  static EmbeddingMatrix from_rows(const std::vector<std::string>& doc_ids,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::string& model, const std::string& query_prefix,
                                   bool normalize);

 private:
  friend EmbeddingMatrix embed_corpus(const std::vector<Document>& corpus,
                                      const EmbedClientConfig& config, EmbeddingEndpoint& endpoint,
                                      const std::filesystem::path& out_path);

  size_t dim_ = 0;
  bool normalized_ = true;
  std::string model_;
  std::string query_prefix_;
  std::vector<std::string> doc_ids_;
  std::vector<float> data_;
};

/// Embeds every document (title + text) in corpus order and persists the
/// matrix to out_path. Progress survives restarts: completed rows are kept in
/// "<out_path>.partial" and only missing batches are re-requested.
EmbeddingMatrix embed_corpus(const std::vector<Document>& corpus, const EmbedClientConfig& config,
                             EmbeddingEndpoint& endpoint, const std::filesystem::path& out_path);

}  // namespace ragprobe
