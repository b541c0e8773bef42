#include "lbm/report/records_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace lbm::report {

RecordParseError::RecordParseError(int line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

std::vector<harness::RunRecord> parse_records(std::string_view jsonl) {
  std::vector<harness::RunRecord> out;
  int number = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(harness::record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw RecordParseError(number, e.what());
    }
  }
  return out;
}

std::vector<harness::RunRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open records '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_records(buf.str());
  } catch (const RecordParseError& e) {
    throw RecordParseError(e.line(), fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace lbm::report
