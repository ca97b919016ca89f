#pragma once

#include <memory>
#include <string>
#include <vector>

namespace ragprobe {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct ChatParams {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 128;
};

/// Chat-completions endpoint. Implementations must be safe for concurrent
/// calls.
class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual std::string chat(const std::vector<ChatMessage>& messages, const ChatParams& params) = 0;
};

/// Embeddings endpoint: one vector per input string, in request order.
class EmbeddingEndpoint {
 public:
  virtual ~EmbeddingEndpoint() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs,
                                                 const std::string& model) = 0;
};

struct HttpOptions {
  int max_retries = 3;
  int retry_backoff_ms = 200;  // grows linearly per attempt
  int timeout_s = 120;
  std::string api_key;  // sent as "Authorization: Bearer <key>" when nonempty
};

/// POSTs {model, messages, temperature, max_tokens} to a chat-completions URL
/// and returns choices[0].message.content. Retries transport errors and
/// retryable HTTP statuses (429, 5xx).
std::unique_ptr<ChatEndpoint> make_http_chat_endpoint(const std::string& url,
                                                      const HttpOptions& options = {});

/// POSTs {model, input} to an embeddings URL; reads data[*].embedding.
std::unique_ptr<EmbeddingEndpoint> make_http_embedding_endpoint(const std::string& url,
                                                                const HttpOptions& options = {});

/// Reads RAGPROBE_API_KEY into HttpOptions::api_key.
HttpOptions http_options_from_env();

}  // namespace ragprobe
