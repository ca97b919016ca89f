#include "ragprobe/types.hpp"

#include "ragprobe/error.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::original: return "original";
    case Kind::redundancy: return "redundancy";
    case Kind::formal_tone: return "formal_tone";
    case Kind::ambiguity: return "ambiguity";
    case Kind::typo_10: return "typo_10";
    case Kind::typo_25: return "typo_25";
  }
  raise(Errc::invalid_argument, "unknown kind value");
}

Kind kind_from_name(const std::string& name) {
  if (name == "original") return Kind::original;
  if (name == "redundancy") return Kind::redundancy;
  if (name == "formal_tone" || name == "formal") return Kind::formal_tone;
  if (name == "ambiguity") return Kind::ambiguity;
  if (name == "typo_10" || name == "typo10") return Kind::typo_10;
  if (name == "typo_25" || name == "typo25") return Kind::typo_25;
  raise(Errc::invalid_argument, "unknown perturbation kind: " + name);
}

bool is_typo_kind(Kind kind) { return kind == Kind::typo_10 || kind == Kind::typo_25; }

bool is_prompted_kind(Kind kind) {
  return kind == Kind::redundancy || kind == Kind::formal_tone || kind == Kind::ambiguity;
}

std::string QueryKey::encode() const {
  return origin_id + "|" + kind_name(kind) + "|" + std::to_string(variant);
}

QueryKey QueryKey::decode(const std::string& encoded) {
  auto parts = split(encoded, '|');
  if (parts.size() != 3) {
    raise(Errc::parse, "malformed query key: " + encoded);
  }
  QueryKey key;
  key.origin_id = parts[0];
  key.kind = kind_from_name(parts[1]);
  key.variant = parse_int(parts[2], "query key variant");
  return key;
}

const char* setting_name(Setting setting) {
  switch (setting) {
    case Setting::retrieval: return "retrieval";
    case Setting::closed_book: return "closed_book";
    case Setting::oracle: return "oracle";
    case Setting::rag: return "rag";
  }
  raise(Errc::invalid_argument, "unknown setting value");
}

Setting setting_from_name(const std::string& name) {
  if (name == "retrieval") return Setting::retrieval;
  if (name == "closed_book") return Setting::closed_book;
  if (name == "oracle") return Setting::oracle;
  if (name == "rag") return Setting::rag;
  raise(Errc::invalid_argument, "unknown setting: " + name);
}

}  // namespace ragprobe
