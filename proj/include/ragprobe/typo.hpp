#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ragprobe/types.hpp"

namespace ragprobe {

struct TypoConfig {
  double rate = 0.10;  // fraction of eligible words to alter, in (0, 1]
  std::set<std::string> stop_words;  // lowercase; never altered
  uint64_t base_seed = 0;
  int min_word_len = 3;  // minimum letters in a word's alphabetic core

  static TypoConfig with_defaults(double rate, uint64_t base_seed);
};

/// Seed for one (query, variant) pair: base_seed XOR fnv1a64(query_id) XOR variant.
uint64_t typo_seed(uint64_t base_seed, const std::string& query_id, int variant);

/// Whitespace-delimited tokens of `text` that qualify for typo injection: the
/// token's ASCII-letter core has at least min_word_len characters and its
/// lowercase punctuation-stripped form is not a stop word.
std::vector<size_t> eligible_word_indices(const std::string& text, const TypoConfig& config);

/// Number of words to alter: max(1, round-half-up(rate * eligible_count)).
size_t typo_word_count(double rate, size_t eligible_count);

/// Injects QWERTY-adjacent single-character substitutions into exactly
/// typo_word_count(rate, eligible) distinct eligible words. Whitespace and all
/// unselected tokens are byte-identical to the input. Deterministic in
/// (query.id, base_seed, variant).
PerturbedQuery perturb_typo(const Query& query, const TypoConfig& config, int variant, Kind kind);

}  // namespace ragprobe
