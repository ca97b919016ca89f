#include "ragprobe/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ragprobe/error.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

namespace {

constexpr char kMagic[8] = {'R', 'P', 'E', 'M', 'B', '0', '0', '1'};
constexpr char kPartialMagic[8] = {'R', 'P', 'E', 'M', 'B', 'P', '0', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_u64(std::string& out, uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

struct Reader {
  const std::string& data;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > data.size()) raise(Errc::parse, "truncated embedding file");
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v;
    std::memcpy(&v, data.data() + pos, 8);
    pos += 8;
    return v;
  }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(data[pos++]);
  }
  std::string str() {
    uint32_t len = u32();
    need(len);
    std::string s = data.substr(pos, len);
    pos += len;
    return s;
  }
};

std::string doc_embedding_text(const Document& doc) {
  return doc.title.empty() ? doc.text : doc.title + "\n" + doc.text;
}

uint64_t corpus_fingerprint(const std::vector<Document>& corpus) {
  uint64_t h = fnv1a64("corpus");
  for (const auto& doc : corpus) {
    h ^= fnv1a64(doc.id);
    h *= 1099511628211ULL;
    h ^= fnv1a64(doc.text);
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<float> to_row(const std::vector<double>& vec, bool normalize,
                          const std::string& doc_id) {
  std::vector<float> row(vec.size());
  double norm_sq = 0.0;
  for (double v : vec) norm_sq += v * v;
  if (normalize) {
    if (norm_sq == 0.0) {
      raise(Errc::invariant, "zero-norm embedding for document " + doc_id);
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    for (size_t i = 0; i < vec.size(); ++i) row[i] = static_cast<float>(vec[i] * inv);
  } else {
    for (size_t i = 0; i < vec.size(); ++i) row[i] = static_cast<float>(vec[i]);
  }
  return row;
}

std::string partial_header(const EmbedClientConfig& config, size_t dim, size_t count,
                           uint64_t fingerprint) {
  std::string out;
  out.append(kPartialMagic, sizeof(kPartialMagic));
  put_u32(out, kVersion);
  out.push_back(config.normalize ? 1 : 0);
  put_u32(out, static_cast<uint32_t>(dim));
  put_u64(out, count);
  put_string(out, config.model);
  put_string(out, config.query_prefix);
  put_u64(out, fingerprint);
  return out;
}

}  // namespace

std::string default_query_prefix(const std::string& model) {
  if (to_lower_ascii(model).find("bge") != std::string::npos) {
    return "Represent this sentence for searching relevant passages:";
  }
  return "";
}

std::vector<ScoredDoc> EmbeddingMatrix::search_vector(const std::vector<double>& query,
                                                      size_t k) const {
  if (k < 1) raise(Errc::invalid_argument, "k must be >= 1");
  if (query.size() != dim_) {
    raise(Errc::dimension_mismatch, "query embedding dimension " + std::to_string(query.size()) +
                                        " != matrix dimension " + std::to_string(dim_));
  }
  std::vector<uint32_t> ordinals(count());
  std::vector<double> scores(count());
  for (size_t i = 0; i < count(); ++i) {
    const float* r = row(i);
    double dot = 0.0;
    for (size_t j = 0; j < dim_; ++j) dot += query[j] * r[j];
    ordinals[i] = static_cast<uint32_t>(i);
    scores[i] = dot;
  }
  auto better = [&](uint32_t a, uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return doc_ids_[a] < doc_ids_[b];
  };
  size_t take = std::min(k, ordinals.size());
  std::partial_sort(ordinals.begin(), ordinals.begin() + static_cast<long>(take), ordinals.end(),
                    better);
  std::vector<ScoredDoc> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.push_back({doc_ids_[ordinals[i]], scores[ordinals[i]]});
  return out;
}

std::vector<ScoredDoc> EmbeddingMatrix::search(const std::string& query_text,
                                               EmbeddingEndpoint& endpoint, size_t k) const {
  std::string text = query_prefix_.empty() ? query_text : query_prefix_ + " " + query_text;
  auto vectors = endpoint.embed({text}, model_);
  if (vectors.size() != 1) raise(Errc::transport, "embedding endpoint returned no vector");
  std::vector<double> query = std::move(vectors[0]);
  if (query.size() != dim_) {
    raise(Errc::dimension_mismatch, "query embedding dimension " + std::to_string(query.size()) +
                                        " != matrix dimension " + std::to_string(dim_));
  }
  if (normalized_) {
    double norm_sq = 0.0;
    for (double v : query) norm_sq += v * v;
    if (norm_sq > 0.0) {
      double inv = 1.0 / std::sqrt(norm_sq);
      for (double& v : query) v *= inv;
    }
  }
  return search_vector(query, k);
}

void EmbeddingMatrix::save(const std::filesystem::path& path) const {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  out.push_back(normalized_ ? 1 : 0);
  put_u32(out, static_cast<uint32_t>(dim_));
  put_u64(out, count());
  put_string(out, model_);
  put_string(out, query_prefix_);
  out.append(reinterpret_cast<const char*>(data_.data()), data_.size() * sizeof(float));
  for (const auto& id : doc_ids_) put_string(out, id);
  write_file_atomic(path, out);
}

EmbeddingMatrix EmbeddingMatrix::load(const std::filesystem::path& path) {
  std::string data = read_file(path);
  Reader r{data};
  r.need(sizeof(kMagic));
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    raise(Errc::parse, "not an embedding matrix file: " + path.string());
  }
  r.pos = sizeof(kMagic);
  uint32_t version = r.u32();
  if (version != kVersion) {
    raise(Errc::parse, "unsupported embedding matrix version " + std::to_string(version));
  }
  EmbeddingMatrix matrix;
  matrix.normalized_ = r.u8() != 0;
  matrix.dim_ = r.u32();
  uint64_t count = r.u64();
  matrix.model_ = r.str();
  matrix.query_prefix_ = r.str();
  size_t bytes = static_cast<size_t>(count) * matrix.dim_ * sizeof(float);
  r.need(bytes);
  matrix.data_.resize(static_cast<size_t>(count) * matrix.dim_);
  std::memcpy(matrix.data_.data(), data.data() + r.pos, bytes);
  r.pos += bytes;
  matrix.doc_ids_.reserve(count);
  for (uint64_t i = 0; i < count; ++i) matrix.doc_ids_.push_back(r.str());
  if (r.pos != data.size()) raise(Errc::parse, "trailing bytes in embedding matrix file");
  return matrix;
}

EmbeddingMatrix EmbeddingMatrix::from_rows(const std::vector<std::string>& doc_ids,
                                           const std::vector<std::vector<double>>& rows,
                                           const std::string& model,
                                           const std::string& query_prefix, bool normalize) {
  if (doc_ids.size() != rows.size()) {
    raise(Errc::invalid_argument, "doc id / row count mismatch");
  }
  if (rows.empty()) raise(Errc::empty_input, "no embedding rows");
  EmbeddingMatrix matrix;
  matrix.dim_ = rows[0].size();
  matrix.normalized_ = normalize;
  matrix.model_ = model;
  matrix.query_prefix_ = query_prefix;
  matrix.doc_ids_ = doc_ids;
  matrix.data_.reserve(rows.size() * matrix.dim_);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != matrix.dim_) {
      raise(Errc::dimension_mismatch, "row dimension drift at ordinal " + std::to_string(i));
    }
    auto row = to_row(rows[i], normalize, doc_ids[i]);
    matrix.data_.insert(matrix.data_.end(), row.begin(), row.end());
  }
  return matrix;
}

EmbeddingMatrix embed_corpus(const std::vector<Document>& corpus, const EmbedClientConfig& config,
                             EmbeddingEndpoint& endpoint, const std::filesystem::path& out_path) {
  if (corpus.empty()) raise(Errc::empty_input, "cannot embed an empty corpus");
  if (config.batch_size < 1) raise(Errc::invalid_argument, "batch size must be >= 1");

  uint64_t fingerprint = corpus_fingerprint(corpus);
  std::filesystem::path partial_path = out_path;
  partial_path += ".partial";

  // Resume: count complete rows already in the partial file.
  size_t done = 0;
  size_t dim = 0;
  std::string carried;  // validated header + complete rows
  if (std::filesystem::exists(partial_path)) {
    std::string data = read_file(partial_path);
    Reader r{data};
    bool ok = data.size() >= sizeof(kPartialMagic) &&
              std::memcmp(data.data(), kPartialMagic, sizeof(kPartialMagic)) == 0;
    if (ok) {
      r.pos = sizeof(kPartialMagic);
      uint32_t version = r.u32();
      bool normalized = r.u8() != 0;
      uint32_t file_dim = r.u32();
      uint64_t total = r.u64();
      std::string model = r.str();
      std::string prefix = r.str();
      uint64_t file_fingerprint = r.u64();
      if (version == kVersion && normalized == config.normalize && model == config.model &&
          prefix == config.query_prefix && total == corpus.size() &&
          file_fingerprint == fingerprint && file_dim > 0) {
        dim = file_dim;
        size_t row_bytes = static_cast<size_t>(dim) * sizeof(float);
        done = std::min(corpus.size(), (data.size() - r.pos) / row_bytes);
        carried = data.substr(0, r.pos + done * row_bytes);
      }
    }
    // A stale or mismatching partial file is discarded and embedding restarts.
  }

  std::ofstream partial;
  if (!carried.empty()) {
    write_file_atomic(partial_path, carried);
    partial.open(partial_path, std::ios::binary | std::ios::app);
  }

  auto append_rows = [&](const std::vector<std::vector<double>>& batch, size_t first_ordinal) {
    for (size_t i = 0; i < batch.size(); ++i) {
      const auto& vec = batch[i];
      if (dim == 0) {
        dim = vec.size();
        if (dim == 0) raise(Errc::transport, "endpoint returned empty embedding");
        std::filesystem::create_directories(partial_path.parent_path().empty()
                                                ? std::filesystem::path(".")
                                                : partial_path.parent_path());
        write_file_atomic(partial_path,
                          partial_header(config, dim, corpus.size(), fingerprint));
        partial.open(partial_path, std::ios::binary | std::ios::app);
      }
      if (vec.size() != dim) {
        raise(Errc::dimension_mismatch,
              "embedding dimension drift at ordinal " + std::to_string(first_ordinal + i));
      }
      auto row = to_row(vec, config.normalize, corpus[first_ordinal + i].id);
      partial.write(reinterpret_cast<const char*>(row.data()),
                    static_cast<std::streamsize>(row.size() * sizeof(float)));
      if (!partial) raise(Errc::io, "short write to " + partial_path.string());
    }
    partial.flush();
  };

  while (done < corpus.size()) {
    size_t end = std::min(corpus.size(), done + static_cast<size_t>(config.batch_size));
    std::vector<std::string> inputs;
    inputs.reserve(end - done);
    for (size_t i = done; i < end; ++i) inputs.push_back(doc_embedding_text(corpus[i]));
    auto batch = endpoint.embed(inputs, config.model);
    if (batch.size() != inputs.size()) {
      raise(Errc::transport, "embedding endpoint returned " + std::to_string(batch.size()) +
                                 " vectors for " + std::to_string(inputs.size()) + " inputs");
    }
    append_rows(batch, done);
    done = end;
  }
  if (partial.is_open()) partial.close();

  // Finalize: rewrite in the final layout (header + rows + id table).
  std::string data = read_file(partial_path);
  Reader r{data};
  r.pos = sizeof(kPartialMagic);
  r.u32();
  r.u8();
  uint32_t file_dim = r.u32();
  r.u64();
  r.str();
  r.str();
  r.u64();

  EmbeddingMatrix matrix;
  matrix.dim_ = file_dim;
  matrix.normalized_ = config.normalize;
  matrix.model_ = config.model;
  matrix.query_prefix_ = config.query_prefix;
  for (const auto& doc : corpus) matrix.doc_ids_.push_back(doc.id);
  size_t floats = corpus.size() * matrix.dim_;
  r.need(floats * sizeof(float));
  matrix.data_.resize(floats);
  std::memcpy(matrix.data_.data(), data.data() + r.pos, floats * sizeof(float));

  matrix.save(out_path);
  std::filesystem::remove(partial_path);
  return matrix;
}

}  // namespace ragprobe
