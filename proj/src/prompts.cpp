#include "ragprobe/prompts.hpp"

#include "ragprobe/error.hpp"

namespace ragprobe {

namespace {

// The "\n" sequences below are part of the instruction text shown to the
// model, so they are escaped backslash-n characters, not newlines.
const std::string kRedundancyTemplate =
    "Paraphrase the input text {output_per_sample} times by inserting related redundant "
    "knowledge into the input text. Do not insert any information that will answer the "
    "question directly.\n"
    "\n"
    "Separate the output text samples by single \\n between them. Do not output anything "
    "else and do not answer the question but only paraphrase it.\n"
    "\n"
    "Input text: {input_str}\n"
    "Output:\\n\\n\n";

const std::string kFormalToneTemplate =
    "Paraphrase the input text {output_per_sample} times in a more formal tone.\n"
    "\n"
    "Separate the output text samples by single \\n between them. Do not output anything "
    "else and do not answer the question but only paraphrase it.\n"
    "\n"
    "Input text: {input_str}\n"
    "Output:\\n\\n\n";

const std::string kAmbiguityTemplate =
    "Paraphrase the text below {output_per_sample}  times while making it unclear to answer "
    "by introducing ambiguity to the text.\n"
    "Separate the output text samples by single \\n between them. Do not output anything "
    "else and do not answer the question but only paraphrase it.\n"
    "Input text: {input_str}\n"
    "Output:\\n\\n\n";

void replace_all(std::string& text, const std::string& slot, const std::string& value,
                 bool& found) {
  size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
    found = true;
  }
}

}  // namespace

const std::string& perturbation_prompt_template(Kind kind) {
  switch (kind) {
    case Kind::redundancy: return kRedundancyTemplate;
    case Kind::formal_tone: return kFormalToneTemplate;
    case Kind::ambiguity: return kAmbiguityTemplate;
    default: break;
  }
  raise(Errc::invalid_argument, std::string("no prompt template for kind ") + kind_name(kind));
}

PromptSpec PromptSpec::for_kind(Kind kind, int output_per_sample) {
  PromptSpec spec;
  spec.kind = kind;
  spec.template_text = perturbation_prompt_template(kind);
  spec.output_per_sample = output_per_sample;
  return spec;
}

std::string render_prompt(const PromptSpec& spec, const std::string& input) {
  if (spec.output_per_sample < 1) {
    raise(Errc::invalid_argument, "output_per_sample must be >= 1");
  }
  std::string text = spec.template_text;
  bool has_count = false;
  bool has_input = false;
  replace_all(text, "{output_per_sample}", std::to_string(spec.output_per_sample), has_count);
  replace_all(text, "{input_str}", input, has_input);
  if (!has_count || !has_input) {
    raise(Errc::invalid_argument,
          "prompt template must contain {output_per_sample} and {input_str}");
  }
  return text;
}

}  // namespace ragprobe
