#include "ragprobe/runfile.hpp"

#include <sstream>

#include "ragprobe/error.hpp"
#include "ragprobe/util.hpp"

namespace ragprobe {

void save_runfile(const RunFile& run, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& [query_id, docs] : run) {
    for (size_t i = 0; i < docs.size(); ++i) {
      out << query_id << '\t' << docs[i].doc_id << '\t' << (i + 1) << '\t'
          << format_double(docs[i].score) << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

RunFile load_runfile(const std::filesystem::path& path) {
  RunFile run;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4) {
      raise(Errc::parse, path.string() + ":" + std::to_string(line_no) +
                             ": expected 4 tab-separated columns");
    }
    auto& docs = run[cols[0]];
    auto rank = static_cast<size_t>(
        parse_int(cols[2], path.string() + ":" + std::to_string(line_no) + " rank"));
    if (rank != docs.size() + 1) {
      raise(Errc::parse, path.string() + ":" + std::to_string(line_no) +
                             ": ranks must ascend from 1 per query");
    }
    docs.push_back(
        {cols[1], parse_double(cols[3], path.string() + ":" + std::to_string(line_no) + " score")});
  }
  return run;
}

}  // namespace ragprobe
