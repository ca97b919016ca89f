// Deterministic mock chat-completions + embeddings servers for local pipeline
// runs and the end-to-end tests. Responses are pure functions of the request
// body, so repeated runs against these servers are byte-reproducible.
//
// Usage: mock-servers [--port <n>] [--latency-ms <n>] [--dim <n>]
//   POST /v1/chat/completions   {model, messages, temperature, max_tokens}
//   POST /v1/embeddings         {model, input: [...]}

#include <atomic>
#include <chrono>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "mock_logic.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  int port = 8711;
  int latency_ms = 0;
  int dim = 32;

  CLI::App app{"Deterministic mock chat + embeddings endpoints"};
  app.add_option("--port", port, "Listen port (0 = ephemeral)");
  app.add_option("--latency-ms", latency_ms, "Artificial per-request latency");
  app.add_option("--dim", dim, "Embedding dimension");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  std::atomic<uint64_t> chat_calls{0};
  std::atomic<uint64_t> embed_calls{0};

  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++chat_calls;
    if (latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms));
    json body = json::parse(req.body, nullptr, false);
    std::string user;
    if (!body.is_discarded() && body.contains("messages")) {
      for (const auto& message : body["messages"]) {
        if (message.value("role", "") == "user") user = message.value("content", "");
      }
    }
    json reply;
    reply["choices"] = json::array(
        {{{"message", {{"role", "assistant"}, {"content", mock::chat_response(user)}}}}});
    res.set_content(reply.dump(), "application/json");
  });

  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++embed_calls;
    if (latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms));
    json body = json::parse(req.body, nullptr, false);
    json data = json::array();
    if (!body.is_discarded() && body.contains("input")) {
      size_t i = 0;
      for (const auto& input : body["input"]) {
        data.push_back({{"index", i++},
                        {"embedding", mock::embedding_of(input.get<std::string>(),
                                                         static_cast<size_t>(dim))}});
      }
    }
    json reply;
    reply["data"] = std::move(data);
    res.set_content(reply.dump(), "application/json");
  });

  server.Get("/stats", [&](const httplib::Request&, httplib::Response& res) {
    json stats{{"chat_calls", chat_calls.load()}, {"embed_calls", embed_calls.load()}};
    res.set_content(stats.dump(), "application/json");
  });

  if (port == 0) {
    port = server.bind_to_any_port("127.0.0.1");
    std::printf("listening on 127.0.0.1:%d\n", port);
    std::fflush(stdout);
    server.listen_after_bind();
  } else {
    std::printf("listening on 127.0.0.1:%d\n", port);
    std::fflush(stdout);
    server.listen("127.0.0.1", port);
  }
  return 0;
}
