#include "ragprobe/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ragprobe/analyzer.hpp"
#include "ragprobe/error.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

namespace {

constexpr char kMagic[8] = {'R', 'P', 'I', 'D', 'X', '0', '0', '1'};
constexpr uint32_t kVersion = 1;

void index_field(FieldIndex& field, uint32_t ordinal, const std::vector<std::string>& tokens) {
  std::map<std::string, uint32_t> counts;
  for (const auto& token : tokens) ++counts[token];
  for (const auto& [term, tf] : counts) {
    field.postings[term].push_back({ordinal, tf});
  }
  field.doc_len[ordinal] = static_cast<uint32_t>(tokens.size());
  field.total_len += tokens.size();
}

double field_score(const FieldIndex& field, const Bm25Params& params, uint64_t doc_count,
                   const std::vector<std::string>& query_terms, uint32_t ordinal) {
  double score = 0.0;
  double avgdl = field.avgdl();
  double dl = field.doc_len[ordinal];
  for (const auto& term : query_terms) {
    auto it = field.postings.find(term);
    if (it == field.postings.end()) continue;
    const auto& postings = it->second;
    auto pit = std::lower_bound(postings.begin(), postings.end(), ordinal,
                                [](const Posting& p, uint32_t ord) { return p.doc < ord; });
    if (pit == postings.end() || pit->doc != ordinal) continue;
    double tf = pit->tf;
    double idf = bm25_idf(doc_count, postings.size());
    double norm = tf + params.k1 * (1.0 - params.b + params.b * (avgdl > 0 ? dl / avgdl : 0.0));
    score += idf * tf * (params.k1 + 1.0) / norm;
  }
  return score;
}

void accumulate_field(const FieldIndex& field, const Bm25Params& params, uint64_t doc_count,
                      const std::vector<std::string>& query_terms, std::vector<double>& scores,
                      std::vector<uint32_t>& touched, std::vector<char>& seen) {
  double avgdl = field.avgdl();
  for (const auto& term : query_terms) {
    auto it = field.postings.find(term);
    if (it == field.postings.end()) continue;
    const auto& postings = it->second;
    double idf = bm25_idf(doc_count, postings.size());
    for (const Posting& p : postings) {
      double tf = p.tf;
      double dl = field.doc_len[p.doc];
      double norm = tf + params.k1 * (1.0 - params.b + params.b * (avgdl > 0 ? dl / avgdl : 0.0));
      scores[p.doc] += idf * tf * (params.k1 + 1.0) / norm;
      if (!seen[p.doc]) {
        seen[p.doc] = 1;
        touched.push_back(p.doc);
      }
    }
  }
}

// Little-endian primitive writers; the format is defined as LE.
void put_u32(std::string& out, uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_u64(std::string& out, uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

struct Reader {
  const std::string& data;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > data.size()) raise(Errc::parse, "truncated index file");
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v;
    std::memcpy(&v, data.data() + pos, 8);
    pos += 8;
    return v;
  }
  std::string str() {
    uint32_t len = u32();
    need(len);
    std::string s = data.substr(pos, len);
    pos += len;
    return s;
  }
};

void save_field(std::string& out, const FieldIndex& field) {
  put_u64(out, field.total_len);
  for (uint32_t len : field.doc_len) put_u32(out, len);
  std::vector<const std::string*> terms;
  terms.reserve(field.postings.size());
  for (const auto& [term, postings] : field.postings) terms.push_back(&term);
  std::sort(terms.begin(), terms.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  put_u64(out, terms.size());
  for (const std::string* term : terms) {
    put_string(out, *term);
    const auto& postings = field.postings.at(*term);
    put_u64(out, postings.size());
    for (const Posting& p : postings) {
      put_u32(out, p.doc);
      put_u32(out, p.tf);
    }
  }
}

void load_field(Reader& r, FieldIndex& field, size_t doc_count) {
  field.total_len = r.u64();
  field.doc_len.resize(doc_count);
  for (size_t i = 0; i < doc_count; ++i) field.doc_len[i] = r.u32();
  uint64_t term_count = r.u64();
  field.postings.reserve(term_count);
  for (uint64_t t = 0; t < term_count; ++t) {
    std::string term = r.str();
    uint64_t n = r.u64();
    std::vector<Posting> postings(n);
    for (uint64_t i = 0; i < n; ++i) {
      postings[i].doc = r.u32();
      postings[i].tf = r.u32();
    }
    field.postings.emplace(std::move(term), std::move(postings));
  }
}

}  // namespace

double bm25_idf(uint64_t doc_count, uint64_t doc_freq) {
  double n = static_cast<double>(doc_count);
  double df = static_cast<double>(doc_freq);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

InvertedIndex InvertedIndex::build(const std::vector<Document>& corpus, bool with_title) {
  if (corpus.empty()) raise(Errc::empty_input, "cannot index an empty corpus");

  InvertedIndex index;
  index.has_title_ = with_title;
  index.doc_ids_.reserve(corpus.size());
  index.content_.doc_len.resize(corpus.size(), 0);
  if (with_title) index.title_.doc_len.resize(corpus.size(), 0);

  for (size_t i = 0; i < corpus.size(); ++i) {
    const Document& doc = corpus[i];
    auto ord = static_cast<uint32_t>(i);
    index.doc_ids_.push_back(doc.id);
    if (!index.id_to_ordinal_.emplace(doc.id, ord).second) {
      raise(Errc::duplicate_id, "duplicate document id: " + doc.id);
    }
    index_field(index.content_, ord, analyze(doc.text));
    if (with_title) index_field(index.title_, ord, analyze(doc.title));
  }
  return index;
}

uint32_t InvertedIndex::ordinal_of(const std::string& doc_id) const {
  auto it = id_to_ordinal_.find(doc_id);
  if (it == id_to_ordinal_.end()) raise(Errc::invalid_argument, "unknown doc id: " + doc_id);
  return it->second;
}

const FieldIndex& InvertedIndex::field(Field f) const {
  if (f == Field::content) return content_;
  if (!has_title_) raise(Errc::unknown_field, "index was built without a title field");
  return title_;
}

double InvertedIndex::score(const Bm25Params& params, const std::vector<std::string>& query_terms,
                            uint32_t ordinal, Field f) const {
  if (ordinal >= doc_ids_.size()) raise(Errc::invalid_argument, "ordinal out of range");
  return field_score(field(f), params, doc_ids_.size(), query_terms, ordinal);
}

SearchResult InvertedIndex::search(const Bm25Params& params, const std::string& query_text,
                                   size_t k, SearchMode mode) const {
  if (k < 1) raise(Errc::invalid_argument, "k must be >= 1");
  if (mode == SearchMode::multi_field && !has_title_) {
    raise(Errc::unknown_field, "multi_field search requires an index built with titles");
  }

  SearchResult result;
  auto query_terms = analyze(query_text);
  if (query_terms.empty()) {
    result.empty_query = true;
    return result;
  }

  std::vector<double> scores(doc_ids_.size(), 0.0);
  std::vector<uint32_t> touched;
  std::vector<char> seen(doc_ids_.size(), 0);
  accumulate_field(content_, params, doc_ids_.size(), query_terms, scores, touched, seen);
  if (mode == SearchMode::multi_field) {
    accumulate_field(title_, params, doc_ids_.size(), query_terms, scores, touched, seen);
  }

  auto better = [&](uint32_t a, uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return doc_ids_[a] < doc_ids_[b];
  };
  size_t take = std::min(k, touched.size());
  std::partial_sort(touched.begin(), touched.begin() + static_cast<long>(take), touched.end(),
                    better);
  result.docs.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    result.docs.push_back({doc_ids_[touched[i]], scores[touched[i]]});
  }
  return result;
}

void InvertedIndex::save(const std::filesystem::path& dir) const {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  out.push_back(has_title_ ? 1 : 0);
  put_u64(out, doc_ids_.size());
  for (const auto& id : doc_ids_) put_string(out, id);
  save_field(out, content_);
  if (has_title_) save_field(out, title_);
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "index.bin", out);
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& dir) {
  std::string data = read_file(dir / "index.bin");
  Reader r{data};
  r.need(sizeof(kMagic));
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    raise(Errc::parse, "not an index file: " + (dir / "index.bin").string());
  }
  r.pos = sizeof(kMagic);
  uint32_t version = r.u32();
  if (version != kVersion) {
    raise(Errc::parse, "unsupported index version " + std::to_string(version));
  }
  r.need(1);
  bool with_title = data[r.pos++] != 0;
  uint64_t doc_count = r.u64();

  InvertedIndex index;
  index.has_title_ = with_title;
  index.doc_ids_.reserve(doc_count);
  for (uint64_t i = 0; i < doc_count; ++i) {
    std::string id = r.str();
    index.id_to_ordinal_.emplace(id, static_cast<uint32_t>(i));
    index.doc_ids_.push_back(std::move(id));
  }
  load_field(r, index.content_, doc_count);
  if (with_title) load_field(r, index.title_, doc_count);
  if (r.pos != data.size()) raise(Errc::parse, "trailing bytes in index file");
  return index;
}

}  // namespace ragprobe
