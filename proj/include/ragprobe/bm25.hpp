#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragprobe/types.hpp"

namespace ragprobe {

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
};

enum class SearchMode {
  flat,         // content field only
  multi_field,  // content + title, unweighted sum of per-field scores
};

enum class Field {
  content,
  title,
};

struct Posting {
  uint32_t doc = 0;  // ordinal
  uint32_t tf = 0;
};

struct FieldIndex {
  std::unordered_map<std::string, std::vector<Posting>> postings;  // sorted by ordinal
  std::vector<uint32_t> doc_len;
  uint64_t total_len = 0;

  double avgdl() const {
    return doc_len.empty() ? 0.0 : static_cast<double>(total_len) / doc_len.size();
  }
};

struct SearchResult {
  std::vector<ScoredDoc> docs;      // score descending, ties by doc_id ascending
  bool empty_query = false;         // analyzed query produced no tokens
};

/// Okapi BM25 over an in-memory inverted index. Immutable once built;
/// concurrent searches are safe.
class InvertedIndex {
 public:
  /// fields = {content} or {content, title}; the analyzer is applied
  /// identically at index and query time.
  static InvertedIndex build(const std::vector<Document>& corpus, bool with_title);

  size_t doc_count() const { return doc_ids_.size(); }
  bool has_title() const { return has_title_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  uint32_t ordinal_of(const std::string& doc_id) const;
  const FieldIndex& field(Field field) const;

  /// BM25 score of one document for the given analyzed query terms, one field.
  /// Each query-term occurrence contributes idf(t) * tf*(k1+1) /
  /// (tf + k1*(1 - b + b*dl/avgdl)) with idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)).
  double score(const Bm25Params& params, const std::vector<std::string>& query_terms,
               uint32_t ordinal, Field field) const;

  /// Top-k documents sharing at least one query term. multi_field sums the
  /// content and title scores, each with its own length normalization.
  SearchResult search(const Bm25Params& params, const std::string& query_text, size_t k,
                      SearchMode mode) const;

  /// On-disk format: versioned binary header, id table, then per-field doc
  /// lengths and lexicographically sorted postings. Byte-deterministic.
  void save(const std::filesystem::path& dir) const;
  static InvertedIndex load(const std::filesystem::path& dir);

 private:
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, uint32_t> id_to_ordinal_;
  bool has_title_ = false;
  FieldIndex content_;
  FieldIndex title_;
};

double bm25_idf(uint64_t doc_count, uint64_t doc_freq);

}  // namespace ragprobe
