#pragma once

#include <stdexcept>
#include <string>

namespace ragprobe {

// Stable error codes, mirrored one-to-one by the C API status values.
enum class Errc {
  ok = 0,
  failure = 1,
  partial = 2,
  io = 10,
  parse = 11,
  invalid_argument = 12,
  duplicate_id = 13,
  empty_input = 14,
  no_eligible_words = 15,
  wrong_variant_count = 16,
  transport = 17,
  dimension_mismatch = 18,
  empty_gold_set = 19,
  degenerate_variance = 20,
  context_overflow = 21,
  unknown_field = 22,
  missing_stage = 23,
  invariant = 24,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ragprobe
