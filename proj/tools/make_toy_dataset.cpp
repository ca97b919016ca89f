// Regenerates the bundled toy dataset under data/toy: 500 synthetic documents
// and 50 queries, each query carrying one globally unique key term that only
// its gold passage contains. Typos that land on the key term make the gold
// passage unreachable for lexical retrieval, which is the planted signal the
// directional tests measure. Gold passages also embed a "zansw<term>" marker
// consumed by the mock generator.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ragprobe/rng.hpp"

using nlohmann::json;

namespace {

const std::vector<std::string> kTemplates = {
    "which region holds the ancient fortress called {X} according to chronicles",
    "where can travelers find the hidden archive named {X} near the old harbor",
    "what makes the mineral compound known as {X} valuable for early medicine",
};

// Includes the function words and gold-passage vocabulary so that no term is
// unique to the gold passages except each query's key term and its answer
// marker.
const std::vector<std::string> kVocab = {
    "region",   "holds",    "ancient",  "fortress", "called",  "according", "chronicles",
    "travelers", "find",    "hidden",   "archive",  "named",   "near",      "old",
    "harbor",   "makes",    "mineral",  "compound", "known",   "valuable",  "early",
    "medicine", "mountain", "river",    "trade",    "season",  "winter",    "stone",
    "bridge",   "market",   "scroll",   "ledger",   "copper",  "silver",    "grain",
    "vessel",   "journey",  "caravan",  "temple",   "garden",  "castle",    "village",
    "monks",    "scribes",  "records",  "passage",  "northern", "southern", "eastern",
    "western",  "coastal",  "inland",   "frontier", "kingdom", "empire",    "province",
    "harvest",  "festival", "merchant", "sailor",   "the",     "and",       "keepers",
    "describe", "noted",    "marker",   "beside",   "entries", "about",     "within",
};

const std::vector<std::string> kSyllables = {
    "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du", "ka", "ke", "ki", "ko",
    "ku", "la", "le", "li", "lo", "lu", "ma", "me", "mi", "mo", "mu", "na", "ne", "ni",
    "no", "nu", "ra", "re", "ri", "ro", "ru", "sa", "se", "si", "so", "su", "ta", "te",
    "ti", "to", "tu", "va", "ve", "vi", "vo", "vu", "za", "ze", "zi", "zo", "zu",
};

size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), curr(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    curr[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

std::string make_key_term(ragprobe::Rng& rng, const std::vector<std::string>& existing) {
  while (true) {
    std::string term;
    size_t syllable_count = 4 + rng.below(2);
    for (size_t s = 0; s < syllable_count; ++s) {
      term += kSyllables[rng.below(kSyllables.size())];
    }
    bool distinct = std::all_of(existing.begin(), existing.end(), [&](const std::string& other) {
      return levenshtein(term, other) >= 3;
    });
    if (distinct) return term;
  }
}

std::string pick_words(ragprobe::Rng& rng, size_t count) {
  std::ostringstream out;
  for (size_t i = 0; i < count; ++i) {
    if (i) out << " ";
    out << kVocab[rng.below(kVocab.size())];
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  std::string out_dir = "data/toy";
  int query_count = 50;
  int filler_count = 450;
  uint64_t seed = 7;

  CLI::App app{"Regenerate the bundled toy dataset"};
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--queries", query_count, "Number of queries");
  app.add_option("--fillers", filler_count, "Number of filler documents");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  ragprobe::Rng rng(seed);
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> key_terms;
  for (int i = 0; i < query_count; ++i) {
    key_terms.push_back(make_key_term(rng, key_terms));
  }

  std::ostringstream corpus, queries, qrels, answers;
  qrels << "query-id\tcorpus-id\tscore\n";

  for (int i = 0; i < query_count; ++i) {
    const std::string& term = key_terms[static_cast<size_t>(i)];
    char qid[8], did[8];
    std::snprintf(qid, sizeof(qid), "q%02d", i);
    std::snprintf(did, sizeof(did), "g%02d", i);

    const std::string& tpl = kTemplates[static_cast<size_t>(i) % kTemplates.size()];
    std::string text = tpl;
    text.replace(text.find("{X}"), 3, term);
    queries << json{{"_id", qid}, {"text", text}}.dump() << "\n";

    std::string marker = "zansw" + term;
    std::ostringstream doc;
    doc << "the keepers describe " << term << " within the old records and noted the marker "
        << marker << " beside entries about " << pick_words(rng, 3);
    corpus << json{{"_id", did}, {"title", "chronicle of " + term}, {"text", doc.str()}}.dump()
           << "\n";

    qrels << qid << "\t" << did << "\t1\n";
    answers << json{{"query_id", qid}, {"answers", json::array({marker})}}.dump() << "\n";
  }

  for (int i = 0; i < filler_count; ++i) {
    char did[8];
    std::snprintf(did, sizeof(did), "f%03d", i);
    size_t words = 15 + rng.below(16);
    corpus << json{{"_id", did},
                   {"title", "notes on " + kVocab[rng.below(kVocab.size())]},
                   {"text", pick_words(rng, words)}}
                  .dump()
           << "\n";
  }

  auto write = [&](const std::string& name, const std::string& content) {
    auto path = std::filesystem::path(out_dir) / name;
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
      std::fprintf(stderr, "cannot write %s\n", path.c_str());
      return 1;
    }
    std::fwrite(content.data(), 1, content.size(), f);
    std::fclose(f);
    return 0;
  };

  int rc = 0;
  rc |= write("corpus.jsonl", corpus.str());
  rc |= write("queries.jsonl", queries.str());
  rc |= write("qrels.tsv", qrels.str());
  rc |= write("answers.jsonl", answers.str());
  if (rc == 0) {
    std::printf("wrote %d queries, %d documents to %s\n", query_count,
                query_count + filler_count, out_dir.c_str());
  }
  return rc;
}
