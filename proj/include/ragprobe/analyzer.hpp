#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragprobe {

/// Index/query-time analyzer: UTF-8 aware word segmentation with ASCII
/// lowercasing. A token is a maximal run of ASCII alphanumerics and non-ASCII
/// code points; ASCII punctuation and whitespace separate tokens. No stemming,
/// no stop-word removal. Idempotent: analyzing the joined output again yields
/// the same tokens.
std::vector<std::string> analyze(std::string_view text);

}  // namespace ragprobe
