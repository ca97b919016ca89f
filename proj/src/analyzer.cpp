#include "ragprobe/analyzer.hpp"

#include <cctype>

namespace ragprobe {

namespace {

bool is_token_byte(unsigned char c) {
  if (c >= 0x80) return true;  // part of a multi-byte UTF-8 sequence
  return std::isalnum(c) != 0;
}

}  // namespace

std::vector<std::string> analyze(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < text.size() && is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      std::string token(text.substr(start, i - start));
      for (char& c : token) {
        if (static_cast<unsigned char>(c) < 0x80) {
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
      }
      tokens.push_back(std::move(token));
    }
  }
  return tokens;
}

}  // namespace ragprobe
