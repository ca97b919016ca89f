#include "ragprobe/endpoints.hpp"

#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <thread>

#include "httplib.h"
#include "ragprobe/error.hpp"

namespace ragprobe {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    raise(Errc::invalid_argument, "endpoint URL must include a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

// One persistent keep-alive client per (thread, base URL). Clients are
// reused across requests so high-volume runs do not burn an ephemeral port
// per call; a transport error drops the cached connection.
httplib::Client& thread_client(const std::string& base, const HttpOptions& options) {
  thread_local std::map<std::string, std::unique_ptr<httplib::Client>> cache;
  auto& slot = cache[base];
  if (!slot) {
    slot = std::make_unique<httplib::Client>(base);
    slot->set_keep_alive(true);
  }
  slot->set_read_timeout(options.timeout_s, 0);
  slot->set_write_timeout(options.timeout_s, 0);
  slot->set_connection_timeout(options.timeout_s, 0);
  return *slot;
}

class HttpPoster {
 public:
  HttpPoster(std::string url, HttpOptions options)
      : url_(std::move(url)), options_(std::move(options)) {}

  json post_json(const json& body) {
    ParsedUrl parsed = parse_url(url_);
    std::string payload = body.dump();
    std::string last_error;

    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(options_.retry_backoff_ms * attempt));
      }
      auto& client = thread_client(parsed.base, options_);
      httplib::Headers headers;
      if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
      }
      auto res = client.Post(parsed.path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status) + " from " + url_ + ": " + res->body;
        if (retryable_status(res->status)) continue;
        raise(Errc::transport, last_error);
      }
      json parsed_body = json::parse(res->body, nullptr, false);
      if (parsed_body.is_discarded()) {
        raise(Errc::transport, "endpoint returned invalid JSON: " + url_);
      }
      return parsed_body;
    }
    raise(Errc::transport, "request to " + url_ + " failed after " +
                               std::to_string(options_.max_retries + 1) + " attempts: " +
                               last_error);
  }

 private:
  std::string url_;
  HttpOptions options_;
};

class HttpChatEndpoint final : public ChatEndpoint {
 public:
  HttpChatEndpoint(std::string url, HttpOptions options)
      : poster_(std::move(url), std::move(options)) {}

  std::string chat(const std::vector<ChatMessage>& messages, const ChatParams& params) override {
    json body;
    body["model"] = params.model;
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    json msgs = json::array();
    for (const auto& message : messages) {
      msgs.push_back({{"role", message.role}, {"content", message.content}});
    }
    body["messages"] = std::move(msgs);

    json response = poster_.post_json(body);
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty()) {
      raise(Errc::transport, "chat response has no choices");
    }
    const auto& message = response["choices"][0]["message"];
    if (!message.contains("content") || !message["content"].is_string()) {
      raise(Errc::transport, "chat response has no message content");
    }
    return message["content"].get<std::string>();
  }

 private:
  HttpPoster poster_;
};

class HttpEmbeddingEndpoint final : public EmbeddingEndpoint {
 public:
  HttpEmbeddingEndpoint(std::string url, HttpOptions options)
      : poster_(std::move(url), std::move(options)) {}

  std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs,
                                         const std::string& model) override {
    json body;
    body["model"] = model;
    body["input"] = inputs;

    json response = poster_.post_json(body);
    if (!response.contains("data") || !response["data"].is_array()) {
      raise(Errc::transport, "embeddings response has no data array");
    }
    const auto& data = response["data"];
    if (data.size() != inputs.size()) {
      raise(Errc::transport, "embeddings response count mismatch: expected " +
                                 std::to_string(inputs.size()) + ", got " +
                                 std::to_string(data.size()));
    }
    std::vector<std::vector<double>> vectors;
    vectors.reserve(data.size());
    for (const auto& item : data) {
      if (!item.contains("embedding") || !item["embedding"].is_array()) {
        raise(Errc::transport, "embeddings response item missing 'embedding'");
      }
      vectors.push_back(item["embedding"].get<std::vector<double>>());
    }
    return vectors;
  }

 private:
  HttpPoster poster_;
};

}  // namespace

std::unique_ptr<ChatEndpoint> make_http_chat_endpoint(const std::string& url,
                                                      const HttpOptions& options) {
  return std::make_unique<HttpChatEndpoint>(url, options);
}

std::unique_ptr<EmbeddingEndpoint> make_http_embedding_endpoint(const std::string& url,
                                                                const HttpOptions& options) {
  return std::make_unique<HttpEmbeddingEndpoint>(url, options);
}

HttpOptions http_options_from_env() {
  HttpOptions options;
  if (const char* key = std::getenv("RAGPROBE_API_KEY")) options.api_key = key;
  return options;
}

}  // namespace ragprobe
