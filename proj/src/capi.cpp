#include "ragprobe.h"

#include <cstdlib>
#include <cstring>
#include <set>
#include <string>
#include <vector>

#include "ragprobe/bm25.hpp"
#include "ragprobe/dataset.hpp"
#include "ragprobe/dense.hpp"
#include "ragprobe/drivers.hpp"
#include "ragprobe/error.hpp"
#include "ragprobe/metrics.hpp"
#include "ragprobe/runner.hpp"
#include "ragprobe/typo.hpp"

namespace {

thread_local std::string g_last_error;

ragprobe_status status_of(ragprobe::Errc code) {
  return static_cast<ragprobe_status>(static_cast<int>(code));
}

template <typename F>
ragprobe_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const ragprobe::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RAGPROBE_E_FAILURE;
  } catch (...) {
    g_last_error = "unknown error";
    return RAGPROBE_E_FAILURE;
  }
}

ragprobe_status outcome_status(const std::vector<ragprobe::StageOutcome>& outcomes) {
  return ragprobe::exit_code_for(outcomes) == 2 ? RAGPROBE_PARTIAL : RAGPROBE_OK;
}

std::vector<std::string> to_strings(const char* const* items, size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.emplace_back(items[i] ? items[i] : "");
  return out;
}

std::string opt(const char* s) { return s ? s : ""; }

}  // namespace

struct ragprobe_corpus {
  std::vector<ragprobe::Document> docs;
};

struct ragprobe_index {
  ragprobe::InvertedIndex index;
};

struct ragprobe_matrix {
  ragprobe::EmbeddingMatrix matrix;
};

struct ragprobe_hits {
  std::vector<ragprobe::ScoredDoc> docs;
  bool empty_query = false;
};

extern "C" {

const char* ragprobe_version(void) { return ragprobe::kCodeVersion; }

const char* ragprobe_last_error(void) { return g_last_error.c_str(); }

ragprobe_status ragprobe_corpus_load(const char* path, ragprobe_corpus** out) {
  return guarded([&] {
    *out = new ragprobe_corpus{ragprobe::load_corpus(opt(path))};
    return RAGPROBE_OK;
  });
}

size_t ragprobe_corpus_size(const ragprobe_corpus* corpus) {
  return corpus ? corpus->docs.size() : 0;
}

void ragprobe_corpus_free(ragprobe_corpus* corpus) { delete corpus; }

ragprobe_status ragprobe_index_build(const ragprobe_corpus* corpus, int with_title,
                                     ragprobe_index** out) {
  return guarded([&] {
    if (!corpus) ragprobe::raise(ragprobe::Errc::invalid_argument, "corpus handle is null");
    *out = new ragprobe_index{ragprobe::InvertedIndex::build(corpus->docs, with_title != 0)};
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_index_save(const ragprobe_index* index, const char* dir) {
  return guarded([&] {
    if (!index) ragprobe::raise(ragprobe::Errc::invalid_argument, "index handle is null");
    index->index.save(opt(dir));
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_index_open(const char* dir, ragprobe_index** out) {
  return guarded([&] {
    *out = new ragprobe_index{ragprobe::InvertedIndex::load(opt(dir))};
    return RAGPROBE_OK;
  });
}

size_t ragprobe_index_doc_count(const ragprobe_index* index) {
  return index ? index->index.doc_count() : 0;
}

void ragprobe_index_free(ragprobe_index* index) { delete index; }

ragprobe_status ragprobe_index_search(const ragprobe_index* index, const char* query, size_t k,
                                      double k1, double b, int multi_field, ragprobe_hits** out) {
  return guarded([&] {
    if (!index) ragprobe::raise(ragprobe::Errc::invalid_argument, "index handle is null");
    auto result = index->index.search(
        {k1, b}, opt(query), k,
        multi_field ? ragprobe::SearchMode::multi_field : ragprobe::SearchMode::flat);
    *out = new ragprobe_hits{std::move(result.docs), result.empty_query};
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_matrix_open(const char* path, ragprobe_matrix** out) {
  return guarded([&] {
    *out = new ragprobe_matrix{ragprobe::EmbeddingMatrix::load(opt(path))};
    return RAGPROBE_OK;
  });
}

size_t ragprobe_matrix_count(const ragprobe_matrix* matrix) {
  return matrix ? matrix->matrix.count() : 0;
}

size_t ragprobe_matrix_dim(const ragprobe_matrix* matrix) {
  return matrix ? matrix->matrix.dim() : 0;
}

void ragprobe_matrix_free(ragprobe_matrix* matrix) { delete matrix; }

ragprobe_status ragprobe_matrix_search(const ragprobe_matrix* matrix, const double* query,
                                       size_t dim, size_t k, ragprobe_hits** out) {
  return guarded([&] {
    if (!matrix) ragprobe::raise(ragprobe::Errc::invalid_argument, "matrix handle is null");
    std::vector<double> vec(query, query + dim);
    *out = new ragprobe_hits{matrix->matrix.search_vector(vec, k), false};
    return RAGPROBE_OK;
  });
}

size_t ragprobe_hits_count(const ragprobe_hits* hits) { return hits ? hits->docs.size() : 0; }

const char* ragprobe_hits_doc_id(const ragprobe_hits* hits, size_t i) {
  if (!hits || i >= hits->docs.size()) return nullptr;
  return hits->docs[i].doc_id.c_str();
}

double ragprobe_hits_score(const ragprobe_hits* hits, size_t i) {
  if (!hits || i >= hits->docs.size()) return 0.0;
  return hits->docs[i].score;
}

int ragprobe_hits_empty_query(const ragprobe_hits* hits) {
  return hits && hits->empty_query ? 1 : 0;
}

void ragprobe_hits_free(ragprobe_hits* hits) { delete hits; }

ragprobe_status ragprobe_typo(const char* query_id, const char* text, double rate,
                              uint64_t base_seed, int variant, char** out_text,
                              uint64_t* out_seed) {
  return guarded([&] {
    ragprobe::Query query{opt(query_id), opt(text)};
    auto config = ragprobe::TypoConfig::with_defaults(rate, base_seed);
    auto kind = rate > 0.175 ? ragprobe::Kind::typo_25 : ragprobe::Kind::typo_10;
    auto record = ragprobe::perturb_typo(query, config, variant, kind);
    char* buffer = static_cast<char*>(std::malloc(record.text.size() + 1));
    if (!buffer) ragprobe::raise(ragprobe::Errc::failure, "allocation failed");
    std::memcpy(buffer, record.text.c_str(), record.text.size() + 1);
    *out_text = buffer;
    if (out_seed) *out_seed = record.seed.value_or(0);
    return RAGPROBE_OK;
  });
}

void ragprobe_string_free(char* text) { std::free(text); }

ragprobe_status ragprobe_recall_at_k(const char* const* retrieved, size_t n_retrieved,
                                     const char* const* gold, size_t n_gold, size_t k,
                                     double* out) {
  return guarded([&] {
    auto retrieved_ids = to_strings(retrieved, n_retrieved);
    auto gold_ids = to_strings(gold, n_gold);
    std::set<std::string> gold_set(gold_ids.begin(), gold_ids.end());
    *out = ragprobe::recall_at_k(retrieved_ids, gold_set, k);
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_precision_at_k(const char* const* retrieved, size_t n_retrieved,
                                        const char* const* gold, size_t n_gold, size_t k,
                                        double* out) {
  return guarded([&] {
    auto retrieved_ids = to_strings(retrieved, n_retrieved);
    auto gold_ids = to_strings(gold, n_gold);
    std::set<std::string> gold_set(gold_ids.begin(), gold_ids.end());
    *out = ragprobe::precision_at_k(retrieved_ids, gold_set, k);
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_match(const char* output, const char* const* answers, size_t n_answers,
                               int* out) {
  return guarded([&] {
    *out = ragprobe::match_metric(opt(output), to_strings(answers, n_answers));
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_unigram_f1(const char* output, const char* const* answers,
                                    size_t n_answers, double* out) {
  return guarded([&] {
    *out = ragprobe::unigram_f1(opt(output), to_strings(answers, n_answers));
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_pearson(const double* x, const double* y, size_t n, double* out_r,
                                 int* out_degenerate) {
  return guarded([&] {
    std::vector<double> xs(x, x + n);
    std::vector<double> ys(y, y + n);
    auto result = ragprobe::pearson(xs, ys);
    *out_r = result.r;
    if (out_degenerate) *out_degenerate = result.degenerate ? 1 : 0;
    return RAGPROBE_OK;
  });
}

ragprobe_status ragprobe_cmd_perturb(const char* queries_path, const char* kinds_csv,
                                     uint64_t seed, const char* out_path,
                                     const char* chat_endpoint, const char* chat_model) {
  return guarded([&] {
    return outcome_status(ragprobe::drivers::perturb(opt(queries_path), opt(kinds_csv), seed,
                                                     opt(out_path), opt(chat_endpoint),
                                                     opt(chat_model)));
  });
}

ragprobe_status ragprobe_cmd_index_build(const char* corpus_path, const char* fields_csv,
                                         const char* out_dir) {
  return guarded([&] {
    return outcome_status(
        ragprobe::drivers::index_build(opt(corpus_path), opt(fields_csv), opt(out_dir)));
  });
}

ragprobe_status ragprobe_cmd_index_search(const char* index_dir, const char* queries_path,
                                          size_t k, double k1, double b, int multi_field,
                                          const char* out_runfile) {
  return guarded([&] {
    return outcome_status(ragprobe::drivers::index_search(
        opt(index_dir), opt(queries_path), k, k1, b, multi_field != 0, opt(out_runfile)));
  });
}

ragprobe_status ragprobe_cmd_embed(const char* corpus_path, const char* endpoint,
                                   const char* model, int batch_size, int normalize,
                                   const char* query_prefix, const char* out_path) {
  return guarded([&] {
    std::string prefix;
    const std::string* prefix_ptr = nullptr;
    if (query_prefix) {
      prefix = query_prefix;
      prefix_ptr = &prefix;
    }
    return outcome_status(ragprobe::drivers::embed(opt(corpus_path), opt(endpoint), opt(model),
                                                   batch_size, normalize != 0, prefix_ptr,
                                                   opt(out_path)));
  });
}

ragprobe_status ragprobe_cmd_dense_search(const char* matrix_path, const char* queries_path,
                                          size_t k, const char* endpoint,
                                          const char* out_runfile) {
  return guarded([&] {
    return outcome_status(ragprobe::drivers::dense_search(opt(matrix_path), opt(queries_path), k,
                                                          opt(endpoint), opt(out_runfile)));
  });
}

ragprobe_status ragprobe_cmd_quality(const char* queries_path, const char* perturbed_path,
                                     const char* endpoint, const char* model,
                                     const char* out_csv) {
  return guarded([&] {
    return outcome_status(ragprobe::drivers::quality(opt(queries_path), opt(perturbed_path),
                                                     opt(endpoint), opt(model), opt(out_csv)));
  });
}

ragprobe_status ragprobe_cmd_pca(const char* vectors_path, const char* out_csv) {
  return guarded(
      [&] { return outcome_status(ragprobe::drivers::pca(opt(vectors_path), opt(out_csv))); });
}

ragprobe_status ragprobe_cmd_retrieve(const char* config_path) {
  return guarded([&] { return outcome_status(ragprobe::drivers::retrieve(opt(config_path))); });
}

ragprobe_status ragprobe_cmd_run(const char* config_path, const char* setting) {
  return guarded([&] {
    return outcome_status(ragprobe::drivers::run_setting(opt(config_path), opt(setting)));
  });
}

ragprobe_status ragprobe_cmd_correlate(const char* config_path) {
  return guarded([&] { return outcome_status(ragprobe::drivers::correlate(opt(config_path))); });
}

ragprobe_status ragprobe_cmd_report(const char* config_path) {
  return guarded([&] { return outcome_status(ragprobe::drivers::report(opt(config_path))); });
}

ragprobe_status ragprobe_cmd_all(const char* config_path) {
  return guarded([&] { return outcome_status(ragprobe::drivers::all(opt(config_path))); });
}

}  // extern "C"
