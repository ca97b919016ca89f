#include "ragprobe/typo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ragprobe/error.hpp"
#include "ragprobe/keyboard.hpp"
#include "ragprobe/rng.hpp"
#include "ragprobe/stopwords.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

namespace {

struct TokenSpan {
  size_t start = 0;
  size_t len = 0;
};

std::vector<TokenSpan> token_spans(const std::string& text) {
  std::vector<TokenSpan> spans;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) spans.push_back({start, i - start});
  }
  return spans;
}

std::string letter_core(const std::string& token) {
  std::string core;
  for (char c : token) {
    if (std::isalpha(static_cast<unsigned char>(c))) core.push_back(c);
  }
  return core;
}

std::string strip_edge_punct(const std::string& token) {
  size_t b = 0;
  size_t e = token.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
  return token.substr(b, e - b);
}

bool is_eligible(const std::string& token, const TypoConfig& config) {
  if (static_cast<int>(letter_core(token).size()) < config.min_word_len) return false;
  std::string bare = to_lower_ascii(strip_edge_punct(token));
  return !config.stop_words.contains(bare);
}

}  // namespace

TypoConfig TypoConfig::with_defaults(double rate, uint64_t base_seed) {
  TypoConfig config;
  config.rate = rate;
  config.stop_words = default_stop_words();
  config.base_seed = base_seed;
  return config;
}

uint64_t typo_seed(uint64_t base_seed, const std::string& query_id, int variant) {
  return base_seed ^ fnv1a64(query_id) ^ static_cast<uint64_t>(variant);
}

std::vector<size_t> eligible_word_indices(const std::string& text, const TypoConfig& config) {
  std::vector<size_t> eligible;
  auto spans = token_spans(text);
  for (size_t i = 0; i < spans.size(); ++i) {
    if (is_eligible(text.substr(spans[i].start, spans[i].len), config)) eligible.push_back(i);
  }
  return eligible;
}

size_t typo_word_count(double rate, size_t eligible_count) {
  auto n = static_cast<size_t>(std::llround(rate * static_cast<double>(eligible_count)));
  return std::max<size_t>(1, n);
}

PerturbedQuery perturb_typo(const Query& query, const TypoConfig& config, int variant, Kind kind) {
  if (config.rate <= 0.0 || config.rate > 1.0) {
    raise(Errc::invalid_argument, "typo rate must be in (0, 1]");
  }
  if (config.stop_words.empty()) {
    raise(Errc::invalid_argument, "typo stop-word list must be nonempty");
  }
  if (!is_typo_kind(kind)) {
    raise(Errc::invalid_argument, "perturb_typo requires a typo kind");
  }

  auto spans = token_spans(query.text);
  std::vector<size_t> eligible;
  for (size_t i = 0; i < spans.size(); ++i) {
    if (is_eligible(query.text.substr(spans[i].start, spans[i].len), config)) eligible.push_back(i);
  }
  if (eligible.empty()) {
    raise(Errc::no_eligible_words,
          "no eligible words for typo perturbation in query " + query.id);
  }

  uint64_t seed = typo_seed(config.base_seed, query.id, variant);
  Rng rng(seed);

  size_t n_changed = typo_word_count(config.rate, eligible.size());
  rng.shuffle(eligible);
  std::vector<size_t> chosen(eligible.begin(), eligible.begin() + static_cast<long>(n_changed));
  std::sort(chosen.begin(), chosen.end());

  const auto& keyboard = qwerty_adjacency();
  std::string text = query.text;
  for (size_t token_idx : chosen) {
    const TokenSpan& span = spans[token_idx];
    std::vector<size_t> positions;
    for (size_t p = 0; p < span.len; ++p) {
      if (keyboard.has_neighbors(text[span.start + p])) positions.push_back(p);
    }
    // Eligible words carry >= min_word_len ASCII letters, all of which are mapped.
    size_t pos = positions[rng.below(positions.size())];
    char original = text[span.start + pos];
    const auto& neighbors = keyboard.neighbors(original);
    char replacement = neighbors[rng.below(neighbors.size())];
    if (std::isupper(static_cast<unsigned char>(original))) {
      replacement = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement)));
    }
    text[span.start + pos] = replacement;
  }

  PerturbedQuery record;
  record.origin_id = query.id;
  record.kind = kind;
  record.variant = variant;
  record.text = std::move(text);
  record.seed = seed;
  return record;
}

}  // namespace ragprobe
