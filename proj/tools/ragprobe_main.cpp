// ragprobe command-line interface. Talks to the core exclusively through the
// C API in ragprobe.h; see README for subcommand documentation.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "ragprobe.h"

namespace {

const char* env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value ? value : "";
}

int finish(ragprobe_status status) {
  if (status == RAGPROBE_OK) return 0;
  if (status == RAGPROBE_PARTIAL) {
    std::fprintf(stderr, "completed with skipped samples (see run directory skip lists)\n");
    return 2;
  }
  std::fprintf(stderr, "error: %s\n", ragprobe_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAG query-robustness evaluation harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ragprobe_version()));

  // perturb
  std::string perturb_queries, perturb_kinds = "typo10,typo25", perturb_out;
  std::string perturb_chat_endpoint = env_or_empty("RAGPROBE_PERTURB_ENDPOINT");
  std::string perturb_chat_model;
  uint64_t perturb_seed = 0;
  auto* perturb = app.add_subcommand("perturb", "Generate a perturbed-query dataset");
  perturb->add_option("--queries", perturb_queries, "Queries JSONL file")->required();
  perturb->add_option("--kinds", perturb_kinds,
                      "Comma list of typo10,typo25,redundancy,formal,ambiguity");
  perturb->add_option("--seed", perturb_seed, "Base seed for typo kinds");
  perturb->add_option("--out", perturb_out, "Output perturbed dataset path")->required();
  perturb->add_option("--chat-endpoint", perturb_chat_endpoint,
                      "Chat completions URL for prompted kinds");
  perturb->add_option("--chat-model", perturb_chat_model, "Model used for prompted kinds");

  // index build / index search
  auto* index = app.add_subcommand("index", "BM25 inverted index operations");
  index->require_subcommand(1);

  std::string ib_corpus, ib_fields = "content", ib_out;
  auto* index_build = index->add_subcommand("build", "Build an index from a corpus");
  index_build->add_option("--corpus", ib_corpus, "Corpus JSONL file")->required();
  index_build->add_option("--fields", ib_fields, "content or content,title");
  index_build->add_option("--out", ib_out, "Output index directory")->required();

  std::string is_index, is_queries, is_out;
  size_t is_k = 10;
  double is_k1 = 0.9, is_b = 0.4;
  bool is_multi = false;
  auto* index_search = index->add_subcommand("search", "Search an index with a queries file");
  index_search->add_option("--index", is_index, "Index directory")->required();
  index_search->add_option("--queries", is_queries, "Queries or perturbed dataset JSONL")
      ->required();
  index_search->add_option("--k", is_k, "Results per query");
  index_search->add_option("--k1", is_k1, "BM25 k1");
  index_search->add_option("--b", is_b, "BM25 b");
  index_search->add_flag("--multi-field", is_multi, "Sum content and title field scores");
  index_search->add_option("--out", is_out, "Output run file")->required();

  // embed
  std::string embed_corpus, embed_endpoint = env_or_empty("RAGPROBE_EMBED_ENDPOINT");
  std::string embed_model, embed_prefix, embed_out;
  int embed_batch = 16;
  bool embed_no_normalize = false, embed_prefix_set = false;
  auto* embed = app.add_subcommand("embed", "Embed a corpus into a dense matrix file");
  embed->add_option("--corpus", embed_corpus, "Corpus JSONL file")->required();
  embed->add_option("--endpoint", embed_endpoint, "Embeddings endpoint URL");
  embed->add_option("--model", embed_model, "Embedding model name")->required();
  embed->add_option("--batch-size", embed_batch, "Documents per request");
  embed
      ->add_option("--query-prefix", embed_prefix,
                   "Query-side instruction prefix (default depends on model)")
      ->each([&](const std::string&) { embed_prefix_set = true; });
  embed->add_flag("--no-normalize", embed_no_normalize,
                  "Store raw vectors; search ranks by raw inner product");
  embed->add_option("--out", embed_out, "Output matrix file")->required();

  // dense-search
  std::string ds_matrix, ds_queries, ds_out;
  std::string ds_endpoint = env_or_empty("RAGPROBE_EMBED_ENDPOINT");
  size_t ds_k = 10;
  auto* dense = app.add_subcommand("dense-search", "Search a dense matrix with a queries file");
  dense->add_option("--matrix", ds_matrix, "Embedding matrix file")->required();
  dense->add_option("--queries", ds_queries, "Queries or perturbed dataset JSONL")->required();
  dense->add_option("--k", ds_k, "Results per query");
  dense->add_option("--endpoint", ds_endpoint, "Embeddings endpoint URL");
  dense->add_option("--out", ds_out, "Output run file")->required();

  // quality
  std::string q_queries, q_perturbed, q_model, q_out;
  std::string q_endpoint = env_or_empty("RAGPROBE_EMBED_ENDPOINT");
  auto* quality =
      app.add_subcommand("quality", "Semantic-similarity check of a perturbed dataset");
  quality->add_option("--queries", q_queries, "Original queries JSONL")->required();
  quality->add_option("--perturbed", q_perturbed, "Perturbed dataset JSONL")->required();
  quality->add_option("--endpoint", q_endpoint, "Embeddings endpoint URL");
  quality->add_option("--model", q_model, "Embedding model name")->required();
  quality->add_option("--out", q_out, "Output CSV")->required();

  // pca
  std::string pca_vectors, pca_out;
  auto* pca = app.add_subcommand("pca", "Project exported vectors to 2-D principal components");
  pca->add_option("--vectors", pca_vectors, "JSONL of {id, vector} records")->required();
  pca->add_option("--out", pca_out, "Output CSV of id,pc1,pc2")->required();

  // pipeline stages
  std::string config_path, run_setting_name;
  auto* retrieve = app.add_subcommand("retrieve", "Run the retrieval stage of an experiment");
  retrieve->add_option("--config", config_path, "Experiment config JSON")->required();
  auto* run = app.add_subcommand("run", "Run one generation setting of an experiment");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->add_option("--setting", run_setting_name, "closed_book, oracle or rag")->required();
  auto* correlate = app.add_subcommand("correlate", "Compute sensitivity correlations");
  correlate->add_option("--config", config_path, "Experiment config JSON")->required();
  auto* report = app.add_subcommand("report", "Emit report tables and series files");
  report->add_option("--config", config_path, "Experiment config JSON")->required();
  auto* all = app.add_subcommand("all", "Run the full pipeline end to end");
  all->add_option("--config", config_path, "Experiment config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  if (perturb->parsed()) {
    return finish(ragprobe_cmd_perturb(perturb_queries.c_str(), perturb_kinds.c_str(),
                                       perturb_seed, perturb_out.c_str(),
                                       perturb_chat_endpoint.c_str(),
                                       perturb_chat_model.c_str()));
  }
  if (index_build->parsed()) {
    return finish(
        ragprobe_cmd_index_build(ib_corpus.c_str(), ib_fields.c_str(), ib_out.c_str()));
  }
  if (index_search->parsed()) {
    return finish(ragprobe_cmd_index_search(is_index.c_str(), is_queries.c_str(), is_k, is_k1,
                                            is_b, is_multi ? 1 : 0, is_out.c_str()));
  }
  if (embed->parsed()) {
    return finish(ragprobe_cmd_embed(embed_corpus.c_str(), embed_endpoint.c_str(),
                                     embed_model.c_str(), embed_batch,
                                     embed_no_normalize ? 0 : 1,
                                     embed_prefix_set ? embed_prefix.c_str() : nullptr,
                                     embed_out.c_str()));
  }
  if (dense->parsed()) {
    return finish(ragprobe_cmd_dense_search(ds_matrix.c_str(), ds_queries.c_str(), ds_k,
                                            ds_endpoint.c_str(), ds_out.c_str()));
  }
  if (quality->parsed()) {
    return finish(ragprobe_cmd_quality(q_queries.c_str(), q_perturbed.c_str(),
                                       q_endpoint.c_str(), q_model.c_str(), q_out.c_str()));
  }
  if (pca->parsed()) {
    return finish(ragprobe_cmd_pca(pca_vectors.c_str(), pca_out.c_str()));
  }
  if (retrieve->parsed()) {
    return finish(ragprobe_cmd_retrieve(config_path.c_str()));
  }
  if (run->parsed()) {
    return finish(ragprobe_cmd_run(config_path.c_str(), run_setting_name.c_str()));
  }
  if (correlate->parsed()) {
    return finish(ragprobe_cmd_correlate(config_path.c_str()));
  }
  if (report->parsed()) {
    return finish(ragprobe_cmd_report(config_path.c_str()));
  }
  if (all->parsed()) {
    return finish(ragprobe_cmd_all(config_path.c_str()));
  }
  return 0;
}
