#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ragprobe/types.hpp"

namespace ragprobe {

/// Run files hold ranked retrieval results, one tab-separated record per
/// (query, rank): query_id, doc_id, rank (1-based), score. Queries are
/// written in sorted key order; ranks ascend within a query.
using RunFile = std::map<std::string, std::vector<ScoredDoc>>;

void save_runfile(const RunFile& run, const std::filesystem::path& path);
RunFile load_runfile(const std::filesystem::path& path);

}  // namespace ragprobe
