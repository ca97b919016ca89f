#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace ragprobe {

struct Document {
  std::string id;
  std::string title;  // may be empty
  std::string text;
};

struct Query {
  std::string id;
  std::string text;
};

struct QRel {
  std::string query_id;
  std::string doc_id;
  int relevance = 0;  // > 0 marks a gold document
};

struct AnswerSet {
  std::string query_id;
  std::vector<std::string> answers;
};

// Perturbation kinds, in the fixed report row order.
enum class Kind {
  original,
  redundancy,
  formal_tone,
  ambiguity,
  typo_10,
  typo_25,
};

inline constexpr std::array<Kind, 6> kKindOrder = {
    Kind::original,  Kind::redundancy, Kind::formal_tone,
    Kind::ambiguity, Kind::typo_10,    Kind::typo_25,
};

const char* kind_name(Kind kind);
Kind kind_from_name(const std::string& name);  // accepts canonical names and CLI aliases
bool is_typo_kind(Kind kind);
bool is_prompted_kind(Kind kind);

struct PerturbedQuery {
  std::string origin_id;
  Kind kind = Kind::original;
  int variant = 0;  // 0..4; always 0 for kind original
  std::string text;
  std::optional<uint64_t> seed;  // present for typo kinds only

  bool operator==(const PerturbedQuery& other) const = default;
};

// Identifies one evaluated sample across all stages.
struct QueryKey {
  std::string origin_id;
  Kind kind = Kind::original;
  int variant = 0;

  bool operator==(const QueryKey& other) const = default;
  auto tie() const { return std::tie(origin_id, kind, variant); }
  bool operator<(const QueryKey& other) const { return tie() < other.tie(); }

  // Runfile/record encoding: "<origin>|<kind>|<variant>". Ids must not contain '|'.
  std::string encode() const;
  static QueryKey decode(const std::string& encoded);
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc& other) const = default;
};

enum class Setting {
  retrieval,
  closed_book,
  oracle,
  rag,
};

const char* setting_name(Setting setting);
Setting setting_from_name(const std::string& name);

struct MetricRecord {
  QueryKey key;
  Setting setting = Setting::retrieval;
  std::string metric;  // "recall@5", "precision@5", "match", "unigram_f1", ...
  double value = 0.0;

  bool operator==(const MetricRecord& other) const = default;
};

}  // namespace ragprobe
