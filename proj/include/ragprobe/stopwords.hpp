#pragma once

#include <set>
#include <string>

namespace ragprobe {

/// The embedded English stop-word list (179 entries) left untouched by typo
/// perturbation.
const std::set<std::string>& default_stop_words();

}  // namespace ragprobe
