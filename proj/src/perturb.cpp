#include "ragprobe/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ragprobe/error.hpp"
#include "ragprobe/parallel.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

std::vector<PerturbedQuery> generate_prompted(const Query& query, const PromptSpec& spec,
                                              ChatEndpoint& chat, const std::string& model,
                                              int retries) {
  if (!is_prompted_kind(spec.kind)) {
    raise(Errc::invalid_argument, "generate_prompted requires a prompted kind");
  }
  std::string prompt = render_prompt(spec, query.text);
  ChatParams params;
  params.model = model;
  params.temperature = 0.0;
  params.max_tokens = 1024;

  std::string last_failure;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    std::string response = chat.chat({{"user", prompt}}, params);
    if (trim(response).empty()) {
      last_failure = "empty response";
      continue;
    }
    std::vector<std::string> variants;
    for (const auto& line : split(response, '\n')) {
      std::string cleaned = trim(line);
      if (!cleaned.empty()) variants.push_back(std::move(cleaned));
    }
    if (static_cast<int>(variants.size()) != spec.output_per_sample) {
      last_failure = "expected " + std::to_string(spec.output_per_sample) + " variants, got " +
                     std::to_string(variants.size());
      continue;
    }
    std::vector<PerturbedQuery> records;
    records.reserve(variants.size());
    for (size_t i = 0; i < variants.size(); ++i) {
      PerturbedQuery rec;
      rec.origin_id = query.id;
      rec.kind = spec.kind;
      rec.variant = static_cast<int>(i);
      rec.text = std::move(variants[i]);
      records.push_back(std::move(rec));
    }
    return records;
  }
  raise(Errc::wrong_variant_count, "prompted generation for query " + query.id + " (" +
                                       kind_name(spec.kind) + ") failed after " +
                                       std::to_string(retries + 1) + " attempts: " + last_failure);
}

PerturbationDataset build_perturbation_dataset(const std::vector<Query>& queries,
                                               const PerturbationOptions& options,
                                               ChatEndpoint* chat) {
  if (queries.empty()) raise(Errc::empty_input, "no queries to perturb");

  std::vector<Kind> kinds;
  for (Kind kind : kKindOrder) {
    if (kind == Kind::original) continue;
    if (std::find(options.kinds.begin(), options.kinds.end(), kind) != options.kinds.end()) {
      kinds.push_back(kind);
    }
  }
  bool needs_chat = std::any_of(kinds.begin(), kinds.end(), is_prompted_kind);
  if (needs_chat && chat == nullptr) {
    raise(Errc::invalid_argument, "prompted kinds requested but no chat endpoint configured");
  }

  // Work items: one per (query, kind). Prompted items hit the endpoint, so
  // the whole grid fans out with bounded concurrency; outputs are committed
  // in (query, kind, variant) order below regardless of completion order.
  struct Item {
    size_t query_idx;
    Kind kind;
  };
  std::vector<Item> items;
  items.reserve(queries.size() * kinds.size());
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    for (Kind kind : kinds) items.push_back({qi, kind});
  }

  std::vector<std::vector<PerturbedQuery>> outputs(items.size());
  auto errors = parallel_for(items.size(), options.concurrency, [&](size_t i) {
    const Query& query = queries[items[i].query_idx];
    Kind kind = items[i].kind;
    if (is_typo_kind(kind)) {
      double rate = kind == Kind::typo_10 ? options.typo10_rate : options.typo25_rate;
      TypoConfig config = TypoConfig::with_defaults(rate, options.base_seed);
      for (int variant = 0; variant < kVariantsPerKind; ++variant) {
        outputs[i].push_back(perturb_typo(query, config, variant, kind));
      }
    } else {
      PromptSpec spec = PromptSpec::for_kind(kind, options.output_per_sample);
      outputs[i] = generate_prompted(query, spec, *chat, options.chat_model, options.retries);
    }
  });

  PerturbationDataset dataset;
  size_t item_idx = 0;
  for (size_t qi = 0; qi < queries.size(); ++qi) {
    const Query& query = queries[qi];
    PerturbedQuery original;
    original.origin_id = query.id;
    original.kind = Kind::original;
    original.variant = 0;
    original.text = query.text;
    dataset.records.push_back(std::move(original));

    for ([[maybe_unused]] Kind kind : kinds) {
      if (!errors[item_idx].empty()) {
        dataset.skips.push_back({query.id, items[item_idx].kind, errors[item_idx]});
      } else {
        for (auto& rec : outputs[item_idx]) dataset.records.push_back(std::move(rec));
      }
      ++item_idx;
    }
  }
  return dataset;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    raise(Errc::dimension_mismatch, "cosine: dimension mismatch " + std::to_string(a.size()) +
                                        " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<QualityStats> quality_similarity(const std::vector<Query>& originals,
                                             const std::vector<PerturbedQuery>& perturbed,
                                             EmbeddingEndpoint& embed, const std::string& model,
                                             int batch_size) {
  if (batch_size < 1) raise(Errc::invalid_argument, "batch size must be >= 1");

  std::unordered_map<std::string, const Query*> by_id;
  for (const auto& query : originals) by_id[query.id] = &query;

  // Embed each distinct text once.
  std::vector<std::string> texts;
  std::unordered_map<std::string, size_t> text_index;
  auto intern = [&](const std::string& text) {
    auto [it, inserted] = text_index.try_emplace(text, texts.size());
    if (inserted) texts.push_back(text);
    return it->second;
  };

  struct Pair {
    Kind kind;
    size_t origin_text;
    size_t variant_text;
  };
  std::vector<Pair> pairs;
  for (const auto& rec : perturbed) {
    if (rec.kind == Kind::original) continue;
    auto it = by_id.find(rec.origin_id);
    if (it == by_id.end()) {
      raise(Errc::invalid_argument, "perturbed record without origin query: " + rec.origin_id);
    }
    pairs.push_back({rec.kind, intern(it->second->text), intern(rec.text)});
  }

  std::vector<std::vector<double>> vectors(texts.size());
  for (size_t start = 0; start < texts.size(); start += batch_size) {
    size_t end = std::min(texts.size(), start + batch_size);
    std::vector<std::string> batch(texts.begin() + start, texts.begin() + end);
    auto embedded = embed.embed(batch, model);
    for (size_t i = 0; i < embedded.size(); ++i) {
      if (!vectors.empty() && !vectors[0].empty() && embedded[i].size() != vectors[0].size()) {
        raise(Errc::dimension_mismatch, "embedding dimension drift across batches");
      }
      vectors[start + i] = std::move(embedded[i]);
    }
  }

  std::map<Kind, QualityStats> by_kind;
  for (const auto& pair : pairs) {
    auto& stats = by_kind[pair.kind];
    stats.kind = pair.kind;
    stats.per_sample_similarities.push_back(
        cosine_similarity(vectors[pair.origin_text], vectors[pair.variant_text]));
  }

  std::vector<QualityStats> out;
  for (Kind kind : kKindOrder) {
    auto it = by_kind.find(kind);
    if (it == by_kind.end()) continue;
    auto& stats = it->second;
    double sum = 0.0;
    for (double s : stats.per_sample_similarities) sum += s;
    stats.mean_cosine_similarity = sum / static_cast<double>(stats.per_sample_similarities.size());
    out.push_back(std::move(stats));
  }
  return out;
}

}  // namespace ragprobe
