#include "ragprobe/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ragprobe/error.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, const std::filesystem::path& path, size_t line_no) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    raise(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": malformed record");
  }
  return obj;
}

std::string require_string(const json& obj, const char* field, const std::filesystem::path& path,
                           size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    raise(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": missing string field '" +
                           field + "'");
  }
  return it->get<std::string>();
}

void check_no_separator(const std::string& id, const std::filesystem::path& path, size_t line_no) {
  if (id.find('|') != std::string::npos) {
    raise(Errc::parse, path.string() + ":" + std::to_string(line_no) +
                           ": id contains reserved character '|': " + id);
  }
}

}  // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj = parse_line(line, path, line_no);
    Document doc;
    doc.id = require_string(obj, "_id", path, line_no);
    if (auto it = obj.find("title"); it != obj.end() && it->is_string()) {
      doc.title = it->get<std::string>();
    }
    doc.text = require_string(obj, "text", path, line_no);
    if (doc.id.empty()) {
      raise(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": empty document id");
    }
    check_no_separator(doc.id, path, line_no);
    if (doc.text.empty()) {
      raise(Errc::empty_input,
            path.string() + ":" + std::to_string(line_no) + ": empty text for document " + doc.id);
    }
    if (!seen.insert(doc.id).second) {
      raise(Errc::duplicate_id,
            path.string() + ":" + std::to_string(line_no) + ": duplicate document id " + doc.id);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj = parse_line(line, path, line_no);
    Query query;
    query.id = require_string(obj, "_id", path, line_no);
    query.text = require_string(obj, "text", path, line_no);
    if (query.id.empty() || query.text.empty()) {
      raise(Errc::empty_input,
            path.string() + ":" + std::to_string(line_no) + ": empty query id or text");
    }
    check_no_separator(query.id, path, line_no);
    if (!seen.insert(query.id).second) {
      raise(Errc::duplicate_id,
            path.string() + ":" + std::to_string(line_no) + ": duplicate query id " + query.id);
    }
    queries.push_back(std::move(query));
  }
  return queries;
}

std::vector<QRel> load_qrels(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty()) raise(Errc::empty_input, path.string() + ": empty qrels file");

  // Header row required: "query-id<TAB>corpus-id<TAB>score". A numeric third
  // column on line 1 means the header is missing.
  auto header = split(lines[0], '\t');
  if (header.size() != 3) {
    raise(Errc::parse, path.string() + ":1: expected 3 tab-separated header columns, got " +
                           std::to_string(header.size()));
  }
  bool numeric = !trim(header[2]).empty() &&
                 trim(header[2]).find_first_not_of("0123456789") == std::string::npos;
  if (numeric) {
    raise(Errc::parse, path.string() + ":1: missing header row");
  }

  std::vector<QRel> qrels;
  std::set<std::pair<std::string, std::string>> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 3) {
      raise(Errc::parse, path.string() + ":" + std::to_string(i + 1) + ": expected 3 columns, got " +
                             std::to_string(cols.size()));
    }
    QRel qrel;
    qrel.query_id = trim(cols[0]);
    qrel.doc_id = trim(cols[1]);
    qrel.relevance = parse_int(cols[2], path.string() + ":" + std::to_string(i + 1) + " relevance");
    if (qrel.relevance < 0) {
      raise(Errc::parse,
            path.string() + ":" + std::to_string(i + 1) + ": negative relevance");
    }
    if (!seen.insert({qrel.query_id, qrel.doc_id}).second) {
      raise(Errc::duplicate_id, path.string() + ":" + std::to_string(i + 1) +
                                    ": duplicate (query, doc) judgment " + qrel.query_id + ", " +
                                    qrel.doc_id);
    }
    qrels.push_back(std::move(qrel));
  }
  return qrels;
}

std::vector<AnswerSet> load_answers(const std::filesystem::path& path) {
  std::vector<AnswerSet> sets;
  std::unordered_set<std::string> seen;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj = parse_line(line, path, line_no);
    AnswerSet set;
    set.query_id = require_string(obj, "query_id", path, line_no);
    auto it = obj.find("answers");
    if (it == obj.end() || !it->is_array() || it->empty()) {
      raise(Errc::parse,
            path.string() + ":" + std::to_string(line_no) + ": 'answers' must be a nonempty array");
    }
    for (const auto& a : *it) {
      if (!a.is_string() || trim(a.get<std::string>()).empty()) {
        raise(Errc::parse, path.string() + ":" + std::to_string(line_no) +
                               ": answers must be nonempty strings");
      }
      set.answers.push_back(a.get<std::string>());
    }
    if (!seen.insert(set.query_id).second) {
      raise(Errc::duplicate_id, path.string() + ":" + std::to_string(line_no) +
                                    ": duplicate answer set for query " + set.query_id);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

namespace {

void validate_perturbed(const PerturbedQuery& rec, const std::string& where) {
  if (rec.origin_id.empty()) raise(Errc::invariant, where + ": empty origin_id");
  if (rec.text.empty()) raise(Errc::invariant, where + ": empty text");
  if (rec.variant < 0 || rec.variant > 4) {
    raise(Errc::invariant, where + ": variant out of range 0..4");
  }
  if (rec.kind == Kind::original && rec.variant != 0) {
    raise(Errc::invariant, where + ": original record must have variant 0");
  }
  if (is_typo_kind(rec.kind) && !rec.seed.has_value()) {
    raise(Errc::invariant, where + ": typo record missing seed");
  }
}

}  // namespace

std::vector<PerturbedQuery> load_perturbed_dataset(const std::filesystem::path& path) {
  std::vector<PerturbedQuery> records;
  std::set<std::tuple<std::string, Kind, int>> seen;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj = parse_line(line, path, line_no);
    PerturbedQuery rec;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    rec.origin_id = require_string(obj, "origin_id", path, line_no);
    rec.kind = kind_from_name(require_string(obj, "kind", path, line_no));
    auto vit = obj.find("variant");
    if (vit == obj.end() || !vit->is_number_integer()) {
      raise(Errc::parse, where + ": missing integer field 'variant'");
    }
    rec.variant = vit->get<int>();
    rec.text = require_string(obj, "text", path, line_no);
    if (auto sit = obj.find("seed"); sit != obj.end() && !sit->is_null()) {
      if (!sit->is_number_unsigned() && !sit->is_number_integer()) {
        raise(Errc::parse, where + ": 'seed' must be an integer");
      }
      rec.seed = sit->get<uint64_t>();
    }
    check_no_separator(rec.origin_id, path, line_no);
    validate_perturbed(rec, where);
    if (!seen.insert({rec.origin_id, rec.kind, rec.variant}).second) {
      raise(Errc::duplicate_id, where + ": duplicate (origin, kind, variant) record");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_perturbed_dataset(const std::vector<PerturbedQuery>& records,
                            const std::filesystem::path& path) {
  std::set<std::tuple<std::string, Kind, int>> seen;
  std::ostringstream out;
  size_t n = 0;
  for (const auto& rec : records) {
    ++n;
    validate_perturbed(rec, "record " + std::to_string(n));
    if (!seen.insert({rec.origin_id, rec.kind, rec.variant}).second) {
      raise(Errc::invariant, "record " + std::to_string(n) + ": duplicate (origin, kind, variant)");
    }
    json obj;
    obj["origin_id"] = rec.origin_id;
    obj["kind"] = kind_name(rec.kind);
    obj["variant"] = rec.variant;
    obj["text"] = rec.text;
    if (rec.seed) obj["seed"] = *rec.seed;
    out << obj.dump() << "\n";
  }
  write_file_atomic(path, out.str());
}

std::map<std::string, std::set<std::string>> gold_sets(const std::vector<QRel>& qrels) {
  std::map<std::string, std::set<std::string>> gold;
  for (const auto& qrel : qrels) {
    if (qrel.relevance > 0) gold[qrel.query_id].insert(qrel.doc_id);
  }
  return gold;
}

std::vector<std::string> queries_without_gold(const std::vector<Query>& queries,
                                              const std::vector<QRel>& qrels) {
  auto gold = gold_sets(qrels);
  std::vector<std::string> flagged;
  for (const auto& query : queries) {
    auto it = gold.find(query.id);
    if (it == gold.end() || it->second.empty()) flagged.push_back(query.id);
  }
  return flagged;
}

std::vector<std::string> gold_docs_ranked(const std::vector<QRel>& qrels,
                                          const std::string& query_id) {
  std::vector<std::pair<int, std::string>> ranked;
  for (const auto& qrel : qrels) {
    if (qrel.query_id == query_id && qrel.relevance > 0) {
      ranked.emplace_back(qrel.relevance, qrel.doc_id);
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& [rel, id] : ranked) out.push_back(std::move(id));
  return out;
}

}  // namespace ragprobe
