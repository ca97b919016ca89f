#pragma once

// Independent oracles shared by the unit and acceptance suites. These
// deliberately recompute everything from raw inputs instead of reusing the
// implementation's data structures.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ragprobe/analyzer.hpp"
#include "ragprobe/bm25.hpp"
#include "ragprobe/keyboard.hpp"
#include "ragprobe/types.hpp"
#include "ragprobe/util.hpp"

namespace oracles {

// Brute-force BM25: recomputes df/tf/avgdl from the corpus and scores every
// document directly. Per-document accumulation order (field, then query
// token) matches the search definition so exact ties agree bitwise.
struct BruteForceBm25 {
  std::vector<ragprobe::Document> corpus;
  bool with_title = false;

  std::vector<ragprobe::ScoredDoc> search(const ragprobe::Bm25Params& params,
                                          const std::string& query, size_t k,
                                          bool multi_field) const {
    using ragprobe::analyze;
    auto query_terms = analyze(query);
    if (query_terms.empty()) return {};

    std::vector<std::vector<std::string>> content_tokens, title_tokens;
    for (const auto& doc : corpus) {
      content_tokens.push_back(analyze(doc.text));
      if (with_title) title_tokens.push_back(analyze(doc.title));
    }

    auto field_stats = [&](const std::vector<std::vector<std::string>>& tokens) {
      std::map<std::string, size_t> df;
      double total = 0;
      for (const auto& doc_tokens : tokens) {
        total += static_cast<double>(doc_tokens.size());
        std::set<std::string> seen(doc_tokens.begin(), doc_tokens.end());
        for (const auto& term : seen) ++df[term];
      }
      return std::pair{df, total / static_cast<double>(tokens.size())};
    };
    auto [content_df, content_avgdl] = field_stats(content_tokens);
    std::map<std::string, size_t> title_df;
    double title_avgdl = 0;
    if (with_title) std::tie(title_df, title_avgdl) = field_stats(title_tokens);

    auto contribution = [&](const std::vector<std::string>& doc_tokens,
                            const std::map<std::string, size_t>& df, double avgdl,
                            const std::string& term) {
      auto it = df.find(term);
      if (it == df.end()) return 0.0;
      double tf = 0;
      for (const auto& token : doc_tokens) {
        if (token == term) ++tf;
      }
      if (tf == 0) return 0.0;
      double idf = std::log(1.0 + (static_cast<double>(corpus.size()) -
                                   static_cast<double>(it->second) + 0.5) /
                                      (static_cast<double>(it->second) + 0.5));
      double dl = static_cast<double>(doc_tokens.size());
      double norm =
          tf + params.k1 * (1.0 - params.b + params.b * (avgdl > 0 ? dl / avgdl : 0.0));
      return idf * tf * (params.k1 + 1.0) / norm;
    };

    std::vector<std::pair<double, std::string>> scored;
    for (size_t i = 0; i < corpus.size(); ++i) {
      double score = 0;
      bool touched = false;
      for (const auto& term : query_terms) {
        double c = contribution(content_tokens[i], content_df, content_avgdl, term);
        if (c != 0.0) touched = true;
        score += c;
      }
      if (multi_field) {
        for (const auto& term : query_terms) {
          double c = contribution(title_tokens[i], title_df, title_avgdl, term);
          if (c != 0.0) touched = true;
          score += c;
        }
      }
      if (touched) scored.emplace_back(score, corpus[i].id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<ragprobe::ScoredDoc> out;
    for (size_t i = 0; i < std::min(k, scored.size()); ++i) {
      out.push_back({scored[i].second, scored[i].first});
    }
    return out;
  }
};

inline std::vector<ragprobe::Document> random_corpus(std::mt19937_64& rng, size_t n_docs,
                                                     const std::vector<std::string>& vocab) {
  std::vector<ragprobe::Document> corpus;
  for (size_t i = 0; i < n_docs; ++i) {
    size_t len = 3 + rng() % 30;
    std::string text, title;
    for (size_t t = 0; t < len; ++t) text += (t ? " " : "") + vocab[rng() % vocab.size()];
    size_t title_len = rng() % 4;
    for (size_t t = 0; t < title_len; ++t) title += (t ? " " : "") + vocab[rng() % vocab.size()];
    char id[16];
    std::snprintf(id, sizeof(id), "doc%03zu", i);
    corpus.push_back({id, title, text});
  }
  return corpus;
}

// Token-level verification of a typo perturbation against its source text.
struct TypoDiff {
  size_t changed_words = 0;
  bool whitespace_identical = true;
  bool locality_ok = true;   // changed words differ in exactly one character
  bool adjacency_ok = true;  // the differing pair is QWERTY-adjacent
  bool stop_words_intact = true;
};

inline TypoDiff diff_typo(const std::string& original, const std::string& perturbed,
                          const std::set<std::string>& stop_words) {
  using ragprobe::split_whitespace;
  using ragprobe::to_lower_ascii;

  TypoDiff diff;
  auto a = split_whitespace(original);
  auto b = split_whitespace(perturbed);
  if (a.size() != b.size() || original.size() != perturbed.size()) {
    diff.whitespace_identical = false;
    return diff;
  }
  for (size_t i = 0; i < original.size(); ++i) {
    bool a_space = std::isspace(static_cast<unsigned char>(original[i])) != 0;
    bool b_space = std::isspace(static_cast<unsigned char>(perturbed[i])) != 0;
    if (a_space != b_space || (a_space && original[i] != perturbed[i])) {
      diff.whitespace_identical = false;
      return diff;
    }
  }

  auto bare_lower = [](const std::string& token) {
    size_t begin = 0, end = token.size();
    while (begin < end && std::ispunct(static_cast<unsigned char>(token[begin]))) ++begin;
    while (end > begin && std::ispunct(static_cast<unsigned char>(token[end - 1]))) --end;
    return to_lower_ascii(token.substr(begin, end - begin));
  };

  const auto& keyboard = ragprobe::qwerty_adjacency();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    ++diff.changed_words;
    if (a[i].size() != b[i].size()) {
      diff.locality_ok = false;
      continue;
    }
    size_t differing = 0, pos = 0;
    for (size_t c = 0; c < a[i].size(); ++c) {
      if (a[i][c] != b[i][c]) {
        ++differing;
        pos = c;
      }
    }
    if (differing != 1) {
      diff.locality_ok = false;
      continue;
    }
    char from = static_cast<char>(std::tolower(static_cast<unsigned char>(a[i][pos])));
    char to = static_cast<char>(std::tolower(static_cast<unsigned char>(b[i][pos])));
    const auto& neighbors = keyboard.neighbors(from);
    if (std::find(neighbors.begin(), neighbors.end(), to) == neighbors.end()) {
      diff.adjacency_ok = false;
    }
    if (stop_words.contains(bare_lower(a[i]))) diff.stop_words_intact = false;
  }
  return diff;
}

}  // namespace oracles
