#pragma once

#include <string>

#include "ragprobe/types.hpp"

namespace ragprobe {

struct PromptSpec {
  Kind kind = Kind::redundancy;  // redundancy | formal_tone | ambiguity
  std::string template_text;     // must contain {output_per_sample} and {input_str}
  int output_per_sample = 5;

  static PromptSpec for_kind(Kind kind, int output_per_sample = 5);
};

/// Compiled-in paraphrase prompt template for one prompted kind. The same
/// text ships under assets/prompts/ (one file per kind); a test pins the two
/// copies together.
const std::string& perturbation_prompt_template(Kind kind);

/// Fills {output_per_sample} and {input_str}. Throws if a slot is missing.
std::string render_prompt(const PromptSpec& spec, const std::string& input);

}  // namespace ragprobe
