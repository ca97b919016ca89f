#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ragprobe/types.hpp"

namespace ragprobe {

/// QA-metric normalization: lowercase, collapse whitespace, strip leading and
/// trailing punctuation from each token.
std::vector<std::string> normalize_tokens(const std::string& text);
std::string normalize_text(const std::string& text);

/// |top-k of retrieved ∩ gold| / |gold|. Gold must be nonempty.
double recall_at_k(const std::vector<std::string>& retrieved, const std::set<std::string>& gold,
                   size_t k);

/// |top-k of retrieved ∩ gold| / k.
double precision_at_k(const std::vector<std::string>& retrieved, const std::set<std::string>& gold,
                      size_t k);

/// 1 iff some normalized answer is a substring of the normalized output.
int match_metric(const std::string& output, const std::vector<std::string>& answers);

/// Max over answers of the token-multiset F1 between output and answer.
double unigram_f1(const std::string& output, const std::vector<std::string>& answers);

struct MacroAggregate {
  double mean = 0.0;     // mean over origins of per-origin variant means
  size_t origin_count = 0;
  bool complete = true;  // false when any origin is missing variants
};

/// Macro aggregation for one (setting, metric, kind) slice: average each
/// origin's variants first, then average origins. Missing variants are
/// tolerated and flagged.
MacroAggregate aggregate(const std::vector<MetricRecord>& records, Setting setting,
                         const std::string& metric, Kind kind,
                         int expected_variants);

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // either series has zero variance
};

/// Sample Pearson correlation. Series must have equal length >= 2.
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

struct DeltaRecord {
  std::string origin_id;
  Kind kind = Kind::redundancy;
  int variant = 0;
  Setting setting = Setting::retrieval;
  double delta = 0.0;  // value(original) - value(perturbed): positive = degradation
};

/// Per-sample performance discrepancies against each origin's unperturbed
/// record. Variants whose origin lacks an original-record value are dropped.
std::vector<DeltaRecord> compute_deltas(const std::vector<MetricRecord>& records, Setting setting,
                                        const std::string& metric);

enum class Pairing {
  ret_rag,
  cb_rag,
  or_rag,
};

const char* pairing_name(Pairing pairing);

struct CorrelationCell {
  double r = 0.0;
  size_t pair_count = 0;
  size_t dropped = 0;        // samples present on only one side
  bool degenerate = false;   // zero variance in either delta series
  bool insufficient = false; // fewer than 2 complete pairs
};

struct CorrelationReport {
  // kind -> pairing -> cell; kinds in kKindOrder minus original.
  std::map<Kind, std::map<Pairing, CorrelationCell>> cells;
};

/// Pearson correlation of per-sample deltas, per kind and pairing. Retrieval
/// deltas use `retrieval_metric` (e.g. "recall@5"); generation settings use
/// `generation_metric` (e.g. "match").
CorrelationReport correlation_report(const std::vector<MetricRecord>& records,
                                     const std::string& retrieval_metric,
                                     const std::string& generation_metric);

}  // namespace ragprobe
