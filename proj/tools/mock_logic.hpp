#pragma once

// Deterministic endpoint behavior shared by the mock-servers tool and the
// test suites. The chat mock answers QA prompts by echoing every answer
// marker (token starting with "zansw") found in the Background block, so its
// correctness for a query is exactly "that query's gold document is in the
// context". Paraphrase prompts get five variants that keep the input tokens.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mock {

inline uint64_t fnv1a64(const std::string& s) {
  uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

/// Unit-free pseudo-embedding: reproducible values in [-1, 1) seeded by the
/// input text.
inline std::vector<double> embedding_of(const std::string& text, size_t dim = 32) {
  std::mt19937_64 rng(fnv1a64(text));
  std::vector<double> vec(dim);
  for (double& v : vec) {
    v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  }
  return vec;
}

inline std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

inline std::string chat_response(const std::string& user_content) {
  // Paraphrase request from the perturbation prompts.
  if (user_content.find("Paraphrase the input text") != std::string::npos ||
      user_content.find("Paraphrase the text below") != std::string::npos) {
    std::string input;
    auto start = user_content.find("Input text: ");
    if (start != std::string::npos) {
      start += std::string("Input text: ").size();
      auto end = user_content.find('\n', start);
      input = user_content.substr(start, end == std::string::npos ? std::string::npos
                                                                  : end - start);
    }
    std::ostringstream out;
    for (int i = 1; i <= 5; ++i) {
      if (i > 1) out << "\n";
      out << input << " rephrased " << i;
    }
    return out.str();
  }

  // QA request: list every answer marker present in the Background block.
  auto background_pos = user_content.find("Background:");
  if (background_pos != std::string::npos) {
    auto question_pos = user_content.find("\n\nQuestion:", background_pos);
    std::string background = user_content.substr(
        background_pos, question_pos == std::string::npos ? std::string::npos
                                                          : question_pos - background_pos);
    std::vector<std::string> markers;
    for (const auto& token : whitespace_tokens(background)) {
      if (token.rfind("zansw", 0) == 0) markers.push_back(token);
    }
    if (markers.empty()) return "i do not know";
    std::ostringstream out;
    out << "the records mention";
    for (const auto& marker : markers) out << " " << marker;
    return out.str();
  }

  return "i do not know";
}

}  // namespace mock
