/* ragprobe — C API for the RAG query-robustness evaluation harness.
 *
 * All functions return a ragprobe_status; RAGPROBE_OK (0) means success and
 * RAGPROBE_PARTIAL (2) means the command finished with a nonempty skip list.
 * On any other status, ragprobe_last_error() returns a thread-local message
 * describing the failure. Objects returned through out-parameters are owned
 * by the caller and released with the matching *_free function.
 */

#ifndef RAGPROBE_H
#define RAGPROBE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RAGPROBE_API __declspec(dllexport)
#else
#define RAGPROBE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ragprobe_status {
  RAGPROBE_OK = 0,
  RAGPROBE_E_FAILURE = 1,
  RAGPROBE_PARTIAL = 2,
  RAGPROBE_E_IO = 10,
  RAGPROBE_E_PARSE = 11,
  RAGPROBE_E_INVALID_ARGUMENT = 12,
  RAGPROBE_E_DUPLICATE_ID = 13,
  RAGPROBE_E_EMPTY_INPUT = 14,
  RAGPROBE_E_NO_ELIGIBLE_WORDS = 15,
  RAGPROBE_E_WRONG_VARIANT_COUNT = 16,
  RAGPROBE_E_TRANSPORT = 17,
  RAGPROBE_E_DIMENSION_MISMATCH = 18,
  RAGPROBE_E_EMPTY_GOLD_SET = 19,
  RAGPROBE_E_DEGENERATE_VARIANCE = 20,
  RAGPROBE_E_CONTEXT_OVERFLOW = 21,
  RAGPROBE_E_UNKNOWN_FIELD = 22,
  RAGPROBE_E_MISSING_STAGE = 23,
  RAGPROBE_E_INVARIANT = 24
} ragprobe_status;

RAGPROBE_API const char* ragprobe_version(void);

/* Thread-local message for the most recent failing call; empty on success. */
RAGPROBE_API const char* ragprobe_last_error(void);

/* ---- opaque handles ---------------------------------------------------- */

typedef struct ragprobe_corpus ragprobe_corpus;
typedef struct ragprobe_index ragprobe_index;
typedef struct ragprobe_matrix ragprobe_matrix;
typedef struct ragprobe_hits ragprobe_hits;

/* ---- corpus ------------------------------------------------------------ */

RAGPROBE_API ragprobe_status ragprobe_corpus_load(const char* path, ragprobe_corpus** out);
RAGPROBE_API size_t ragprobe_corpus_size(const ragprobe_corpus* corpus);
RAGPROBE_API void ragprobe_corpus_free(ragprobe_corpus* corpus);

/* ---- BM25 inverted index ------------------------------------------------ */

RAGPROBE_API ragprobe_status ragprobe_index_build(const ragprobe_corpus* corpus, int with_title,
                                                  ragprobe_index** out);
RAGPROBE_API ragprobe_status ragprobe_index_save(const ragprobe_index* index, const char* dir);
RAGPROBE_API ragprobe_status ragprobe_index_open(const char* dir, ragprobe_index** out);
RAGPROBE_API size_t ragprobe_index_doc_count(const ragprobe_index* index);
RAGPROBE_API void ragprobe_index_free(ragprobe_index* index);

/* multi_field != 0 sums content and title scores; requires with_title. */
RAGPROBE_API ragprobe_status ragprobe_index_search(const ragprobe_index* index, const char* query,
                                                   size_t k, double k1, double b, int multi_field,
                                                   ragprobe_hits** out);

/* ---- dense embedding matrix --------------------------------------------- */

RAGPROBE_API ragprobe_status ragprobe_matrix_open(const char* path, ragprobe_matrix** out);
RAGPROBE_API size_t ragprobe_matrix_count(const ragprobe_matrix* matrix);
RAGPROBE_API size_t ragprobe_matrix_dim(const ragprobe_matrix* matrix);
RAGPROBE_API void ragprobe_matrix_free(ragprobe_matrix* matrix);

/* Exact top-k by inner product against a caller-prepared query vector. */
RAGPROBE_API ragprobe_status ragprobe_matrix_search(const ragprobe_matrix* matrix,
                                                    const double* query, size_t dim, size_t k,
                                                    ragprobe_hits** out);

/* ---- search hits --------------------------------------------------------- */

RAGPROBE_API size_t ragprobe_hits_count(const ragprobe_hits* hits);
RAGPROBE_API const char* ragprobe_hits_doc_id(const ragprobe_hits* hits, size_t i);
RAGPROBE_API double ragprobe_hits_score(const ragprobe_hits* hits, size_t i);
/* 1 when the analyzed query produced no tokens (result is empty). */
RAGPROBE_API int ragprobe_hits_empty_query(const ragprobe_hits* hits);
RAGPROBE_API void ragprobe_hits_free(ragprobe_hits* hits);

/* ---- typo perturbation --------------------------------------------------- */

/* Seeded QWERTY-adjacent substitution. *out_text is malloc'd; release with
 * ragprobe_string_free. *out_seed receives the derived per-variant seed. */
RAGPROBE_API ragprobe_status ragprobe_typo(const char* query_id, const char* text, double rate,
                                           uint64_t base_seed, int variant, char** out_text,
                                           uint64_t* out_seed);
RAGPROBE_API void ragprobe_string_free(char* text);

/* ---- metrics -------------------------------------------------------------- */

RAGPROBE_API ragprobe_status ragprobe_recall_at_k(const char* const* retrieved, size_t n_retrieved,
                                                  const char* const* gold, size_t n_gold, size_t k,
                                                  double* out);
RAGPROBE_API ragprobe_status ragprobe_precision_at_k(const char* const* retrieved,
                                                     size_t n_retrieved, const char* const* gold,
                                                     size_t n_gold, size_t k, double* out);
RAGPROBE_API ragprobe_status ragprobe_match(const char* output, const char* const* answers,
                                            size_t n_answers, int* out);
RAGPROBE_API ragprobe_status ragprobe_unigram_f1(const char* output, const char* const* answers,
                                                 size_t n_answers, double* out);
/* *out_degenerate is set to 1 (and *out_r to 0) when either series has zero
 * variance. */
RAGPROBE_API ragprobe_status ragprobe_pearson(const double* x, const double* y, size_t n,
                                              double* out_r, int* out_degenerate);

/* ---- pipeline commands ----------------------------------------------------
 * These mirror the CLI subcommands one-to-one. Empty strings stand for
 * "not provided" on optional parameters.
 */

RAGPROBE_API ragprobe_status ragprobe_cmd_perturb(const char* queries_path, const char* kinds_csv,
                                                  uint64_t seed, const char* out_path,
                                                  const char* chat_endpoint,
                                                  const char* chat_model);
RAGPROBE_API ragprobe_status ragprobe_cmd_index_build(const char* corpus_path,
                                                      const char* fields_csv,
                                                      const char* out_dir);
RAGPROBE_API ragprobe_status ragprobe_cmd_index_search(const char* index_dir,
                                                       const char* queries_path, size_t k,
                                                       double k1, double b, int multi_field,
                                                       const char* out_runfile);
RAGPROBE_API ragprobe_status ragprobe_cmd_embed(const char* corpus_path, const char* endpoint,
                                                const char* model, int batch_size, int normalize,
                                                const char* query_prefix /* NULL = per-model */,
                                                const char* out_path);
RAGPROBE_API ragprobe_status ragprobe_cmd_dense_search(const char* matrix_path,
                                                       const char* queries_path, size_t k,
                                                       const char* endpoint,
                                                       const char* out_runfile);
RAGPROBE_API ragprobe_status ragprobe_cmd_quality(const char* queries_path,
                                                  const char* perturbed_path, const char* endpoint,
                                                  const char* model, const char* out_csv);
RAGPROBE_API ragprobe_status ragprobe_cmd_pca(const char* vectors_path, const char* out_csv);
RAGPROBE_API ragprobe_status ragprobe_cmd_retrieve(const char* config_path);
RAGPROBE_API ragprobe_status ragprobe_cmd_run(const char* config_path, const char* setting);
RAGPROBE_API ragprobe_status ragprobe_cmd_correlate(const char* config_path);
RAGPROBE_API ragprobe_status ragprobe_cmd_report(const char* config_path);
RAGPROBE_API ragprobe_status ragprobe_cmd_all(const char* config_path);

#ifdef __cplusplus
}
#endif

#endif /* RAGPROBE_H */
