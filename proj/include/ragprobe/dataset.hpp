#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ragprobe/types.hpp"

namespace ragprobe {

// BEIR-style file loaders. All loaders are pure, order-preserving, and
// validate invariants at load time (duplicate ids, empty text, malformed
// rows reported with their line number).

std::vector<Document> load_corpus(const std::filesystem::path& path);
std::vector<Query> load_queries(const std::filesystem::path& path);
std::vector<QRel> load_qrels(const std::filesystem::path& path);
std::vector<AnswerSet> load_answers(const std::filesystem::path& path);

std::vector<PerturbedQuery> load_perturbed_dataset(const std::filesystem::path& path);
void save_perturbed_dataset(const std::vector<PerturbedQuery>& records,
                            const std::filesystem::path& path);

/// Gold set of a query: every doc_id judged with relevance > 0.
std::map<std::string, std::set<std::string>> gold_sets(const std::vector<QRel>& qrels);

/// Query ids that appear in qrels but have no relevance > 0 judgment.
std::vector<std::string> queries_without_gold(const std::vector<Query>& queries,
                                              const std::vector<QRel>& qrels);

/// Gold doc ids for one query ordered by relevance descending, then doc_id
/// ascending (the oracle-context order).
std::vector<std::string> gold_docs_ranked(const std::vector<QRel>& qrels,
                                          const std::string& query_id);

}  // namespace ragprobe
