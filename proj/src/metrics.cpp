#include "ragprobe/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "ragprobe/error.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

std::vector<std::string> normalize_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  for (const auto& raw : split_whitespace(text)) {
    size_t b = 0;
    size_t e = raw.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(raw[e - 1]))) --e;
    if (e == b) continue;
    tokens.push_back(to_lower_ascii(raw.substr(b, e - b)));
  }
  return tokens;
}

std::string normalize_text(const std::string& text) {
  std::string out;
  for (const auto& token : normalize_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

namespace {

// Set intersection: a doc id repeated in the ranked list counts once.
size_t hits_at_k(const std::vector<std::string>& retrieved, const std::set<std::string>& gold,
                 size_t k) {
  std::set<std::string> seen;
  size_t depth = std::min(k, retrieved.size());
  for (size_t i = 0; i < depth; ++i) {
    if (gold.contains(retrieved[i])) seen.insert(retrieved[i]);
  }
  return seen.size();
}

}  // namespace

double recall_at_k(const std::vector<std::string>& retrieved, const std::set<std::string>& gold,
                   size_t k) {
  if (gold.empty()) raise(Errc::empty_gold_set, "recall@k requires a nonempty gold set");
  return static_cast<double>(hits_at_k(retrieved, gold, k)) / static_cast<double>(gold.size());
}

double precision_at_k(const std::vector<std::string>& retrieved, const std::set<std::string>& gold,
                      size_t k) {
  if (k < 1) raise(Errc::invalid_argument, "precision@k requires k >= 1");
  return static_cast<double>(hits_at_k(retrieved, gold, k)) / static_cast<double>(k);
}

int match_metric(const std::string& output, const std::vector<std::string>& answers) {
  if (answers.empty()) raise(Errc::invalid_argument, "match requires a nonempty answer set");
  std::string normalized_output = normalize_text(output);
  for (const auto& answer : answers) {
    std::string normalized_answer = normalize_text(answer);
    if (normalized_answer.empty()) continue;
    if (normalized_output.find(normalized_answer) != std::string::npos) return 1;
  }
  return 0;
}

double unigram_f1(const std::string& output, const std::vector<std::string>& answers) {
  if (answers.empty()) raise(Errc::invalid_argument, "unigram F1 requires a nonempty answer set");
  auto output_tokens = normalize_tokens(output);
  std::unordered_map<std::string, size_t> output_counts;
  for (const auto& token : output_tokens) ++output_counts[token];

  double best = 0.0;
  for (const auto& answer : answers) {
    auto answer_tokens = normalize_tokens(answer);
    if (answer_tokens.empty() || output_tokens.empty()) continue;
    std::unordered_map<std::string, size_t> answer_counts;
    for (const auto& token : answer_tokens) ++answer_counts[token];
    size_t overlap = 0;  // clipped counts
    for (const auto& [token, count] : answer_counts) {
      auto it = output_counts.find(token);
      if (it != output_counts.end()) overlap += std::min(count, it->second);
    }
    if (overlap == 0) continue;
    double precision = static_cast<double>(overlap) / static_cast<double>(output_tokens.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(answer_tokens.size());
    best = std::max(best, 2.0 * precision * recall / (precision + recall));
  }
  return best;
}

MacroAggregate aggregate(const std::vector<MetricRecord>& records, Setting setting,
                         const std::string& metric, Kind kind, int expected_variants) {
  std::map<std::string, std::vector<double>> per_origin;
  for (const auto& rec : records) {
    if (rec.setting != setting || rec.metric != metric || rec.key.kind != kind) continue;
    per_origin[rec.key.origin_id].push_back(rec.value);
  }
  MacroAggregate out;
  out.origin_count = per_origin.size();
  if (per_origin.empty()) {
    out.complete = false;
    return out;
  }
  double total = 0.0;
  for (const auto& [origin, values] : per_origin) {
    double sum = 0.0;
    for (double v : values) sum += v;
    total += sum / static_cast<double>(values.size());
    if (static_cast<int>(values.size()) != expected_variants) out.complete = false;
  }
  out.mean = total / static_cast<double>(per_origin.size());
  return out;
}

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    raise(Errc::invalid_argument, "pearson: series length mismatch " + std::to_string(x.size()) +
                                      " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) raise(Errc::invalid_argument, "pearson: need at least 2 samples");

  double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mean_x;
    double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  PearsonResult result;
  if (sxx == 0.0 || syy == 0.0) {
    result.degenerate = true;
    return result;
  }
  result.r = sxy / std::sqrt(sxx * syy);
  result.r = std::clamp(result.r, -1.0, 1.0);
  return result;
}

std::vector<DeltaRecord> compute_deltas(const std::vector<MetricRecord>& records, Setting setting,
                                        const std::string& metric) {
  std::unordered_map<std::string, double> original_value;
  for (const auto& rec : records) {
    if (rec.setting != setting || rec.metric != metric) continue;
    if (rec.key.kind == Kind::original) original_value[rec.key.origin_id] = rec.value;
  }
  std::vector<DeltaRecord> deltas;
  for (const auto& rec : records) {
    if (rec.setting != setting || rec.metric != metric) continue;
    if (rec.key.kind == Kind::original) continue;
    auto it = original_value.find(rec.key.origin_id);
    if (it == original_value.end()) continue;
    deltas.push_back({rec.key.origin_id, rec.key.kind, rec.key.variant, setting,
                      it->second - rec.value});
  }
  return deltas;
}

const char* pairing_name(Pairing pairing) {
  switch (pairing) {
    case Pairing::ret_rag: return "RET";
    case Pairing::cb_rag: return "CB";
    case Pairing::or_rag: return "OR";
  }
  raise(Errc::invalid_argument, "unknown pairing");
}

namespace {

CorrelationCell correlate_series(const std::vector<DeltaRecord>& lhs,
                                 const std::vector<DeltaRecord>& rhs, Kind kind) {
  std::map<std::pair<std::string, int>, double> lhs_by_key;
  for (const auto& d : lhs) {
    if (d.kind == kind) lhs_by_key[{d.origin_id, d.variant}] = d.delta;
  }
  std::map<std::pair<std::string, int>, double> rhs_by_key;
  for (const auto& d : rhs) {
    if (d.kind == kind) rhs_by_key[{d.origin_id, d.variant}] = d.delta;
  }

  CorrelationCell cell;
  std::vector<double> x, y;
  for (const auto& [key, value] : lhs_by_key) {
    auto it = rhs_by_key.find(key);
    if (it == rhs_by_key.end()) {
      ++cell.dropped;
      continue;
    }
    x.push_back(value);
    y.push_back(it->second);
  }
  for (const auto& [key, value] : rhs_by_key) {
    if (!lhs_by_key.contains(key)) ++cell.dropped;
  }
  cell.pair_count = x.size();
  if (x.size() < 2) {
    cell.insufficient = true;
    return cell;
  }
  PearsonResult result = pearson(x, y);
  cell.r = result.r;
  cell.degenerate = result.degenerate;
  return cell;
}

}  // namespace

CorrelationReport correlation_report(const std::vector<MetricRecord>& records,
                                     const std::string& retrieval_metric,
                                     const std::string& generation_metric) {
  auto ret = compute_deltas(records, Setting::retrieval, retrieval_metric);
  auto cb = compute_deltas(records, Setting::closed_book, generation_metric);
  auto oracle = compute_deltas(records, Setting::oracle, generation_metric);
  auto rag = compute_deltas(records, Setting::rag, generation_metric);

  CorrelationReport report;
  for (Kind kind : kKindOrder) {
    if (kind == Kind::original) continue;
    auto& row = report.cells[kind];
    row[Pairing::ret_rag] = correlate_series(ret, rag, kind);
    row[Pairing::cb_rag] = correlate_series(cb, rag, kind);
    row[Pairing::or_rag] = correlate_series(oracle, rag, kind);
  }
  return report;
}

}  // namespace ragprobe
