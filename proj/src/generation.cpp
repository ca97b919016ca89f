#include "ragprobe/generation.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ragprobe/error.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

namespace {

using nlohmann::json;

const char* kClosedBookSystem =
    "You are a helpful assistant. Answer the questions as briefly as possible.";
const char* kWithDocsSystem =
    "You are a helpful assistant. Your task is to extract relevant information from provided "
    "documents and to answer to questions as briefly as possible.";

json request_body(const GenerationConfig& config, const PromptBundle& bundle) {
  json body;
  body["model"] = config.model;
  body["messages"] = json::array({
      {{"role", "system"}, {"content", bundle.system}},
      {{"role", "user"}, {"content", bundle.user}},
  });
  body["temperature"] = config.temperature;
  body["max_tokens"] = config.max_new_tokens;
  return body;
}

}  // namespace

std::string truncate_doc(const std::string& text, int cap) {
  if (cap < 1) raise(Errc::invalid_argument, "doc word cap must be >= 1");
  auto words = split_whitespace(text);
  size_t take = std::min(words.size(), static_cast<size_t>(cap));
  std::string out;
  for (size_t i = 0; i < take; ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string render_context_doc(const Document& doc) {
  return doc.title.empty() ? doc.text : doc.title + "\n" + doc.text;
}

PromptBundle build_prompt(const std::string& question, const std::vector<Document>* docs) {
  PromptBundle bundle;
  if (docs == nullptr) {
    bundle.setting = PromptSetting::closed_book;
    bundle.system = kClosedBookSystem;
    bundle.user = "Question: " + question;
    return bundle;
  }
  bundle.setting = PromptSetting::with_docs;
  bundle.system = kWithDocsSystem;
  bundle.empty_background = docs->empty();
  std::string background;
  for (size_t i = 0; i < docs->size(); ++i) {
    if (i) background += "\n\n";
    background += render_context_doc((*docs)[i]);
  }
  bundle.user = "Background:\n" + background + "\n\nQuestion: " + question;
  return bundle;
}

int estimate_tokens(const std::string& text) {
  return static_cast<int>(std::ceil(1.3 * static_cast<double>(split_whitespace(text).size())));
}

std::vector<Document> fit_docs_to_budget(const std::string& question, std::vector<Document> docs,
                                         const GenerationConfig& config) {
  while (!docs.empty()) {
    PromptBundle bundle = build_prompt(question, &docs);
    if (estimate_tokens(bundle.system + " " + bundle.user) <= config.max_input_tokens) break;
    docs.pop_back();
  }
  return docs;
}

GenerationCache::GenerationCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<std::string> GenerationCache::get(const std::string& key) const {
  auto path = dir_ / (key + ".txt");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file(path);
}

void GenerationCache::put(const std::string& key, const std::string& response,
                          const std::string& request_json) const {
  write_file_atomic(dir_ / (key + ".json"), request_json);
  write_file_atomic(dir_ / (key + ".txt"), response);
}

size_t GenerationCache::size() const {
  size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".txt") ++n;
  }
  return n;
}

std::string cache_key(const GenerationConfig& config, const PromptBundle& bundle) {
  return sha256_hex(request_body(config, bundle).dump());
}

std::string generate(const PromptBundle& bundle, const GenerationConfig& config,
                     const GenerationCache& cache, ChatEndpoint& chat, const std::string& label) {
  int estimate = estimate_tokens(bundle.system + " " + bundle.user);
  if (estimate > config.max_input_tokens) {
    raise(Errc::context_overflow,
          "input estimate " + std::to_string(estimate) + " tokens exceeds limit " +
              std::to_string(config.max_input_tokens) +
              (label.empty() ? "" : " for " + label));
  }

  json body = request_body(config, bundle);
  std::string key = sha256_hex(body.dump());
  if (auto hit = cache.get(key)) return *hit;

  ChatParams params;
  params.model = config.model;
  params.temperature = config.temperature;
  params.max_tokens = config.max_new_tokens;
  std::string response = chat.chat({{"system", bundle.system}, {"user", bundle.user}}, params);
  cache.put(key, response, body.dump(2) + "\n");
  return response;
}

}  // namespace ragprobe
