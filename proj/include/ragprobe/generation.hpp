#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ragprobe/endpoints.hpp"
#include "ragprobe/types.hpp"

namespace ragprobe {

struct GenerationConfig {
  std::string endpoint_url;
  std::string model;
  int max_new_tokens = 128;
  double temperature = 0.0;  // evaluation runs are greedy
  int max_input_tokens = 4096;
  int doc_word_cap = 100;
  int retries = 3;
};

enum class PromptSetting {
  closed_book,
  with_docs,
};

struct PromptBundle {
  std::string system;
  std::string user;
  PromptSetting setting = PromptSetting::closed_book;
  bool empty_background = false;  // with_docs requested but no documents given
};

struct GenerationRecord {
  QueryKey key;
  Setting setting = Setting::closed_book;
  std::vector<std::string> doc_ids;  // context docs in prompt order
  std::string output;
  std::string cache_key;

  bool operator==(const GenerationRecord& other) const = default;
};

/// First min(cap, word_count) whitespace-delimited words, single-space joined.
std::string truncate_doc(const std::string& text, int cap = 100);

/// Renders a document for the Background block: "{title}\n{text}", the title
/// line omitted when empty. Pass pre-truncated docs.
std::string render_context_doc(const Document& doc);

/// Closed-book or with-docs QA prompt. Docs appear in the given (retrieval
/// rank) order, separated by blank lines inside the Background block.
PromptBundle build_prompt(const std::string& question, const std::vector<Document>* docs);

/// Whitespace-token count times 1.3, rounded up: the tokenizer-agnostic input
/// length estimate used for the context budget.
int estimate_tokens(const std::string& text);

/// Drops documents from the tail until the with-docs prompt fits the input
/// budget. The question is never truncated.
std::vector<Document> fit_docs_to_budget(const std::string& question,
                                         std::vector<Document> docs,
                                         const GenerationConfig& config);

/// Content-addressed response cache: one "<key>.txt" per response plus a
/// "<key>.json" request sidecar. Writes are atomic (temp file + rename).
class GenerationCache {
 public:
  explicit GenerationCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& response,
           const std::string& request_json) const;
  size_t size() const;

 private:
  std::filesystem::path dir_;
};

/// Stable key: SHA-256 over (model, messages, sampling params).
std::string cache_key(const GenerationConfig& config, const PromptBundle& bundle);

/// Calls the chat endpoint once per distinct prompt; cache hits short-circuit
/// the call and return the original response bytes. `label` names the work
/// item in errors (e.g. the query key).
std::string generate(const PromptBundle& bundle, const GenerationConfig& config,
                     const GenerationCache& cache, ChatEndpoint& chat,
                     const std::string& label = "");

}  // namespace ragprobe
