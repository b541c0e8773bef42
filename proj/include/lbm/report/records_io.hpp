#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lbm/harness/record.hpp"

namespace lbm::report {

class RecordParseError : public std::runtime_error {
 public:
  RecordParseError(int line, const std::string& what);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// One RunRecord per non-blank line.
std::vector<harness::RunRecord> parse_records(std::string_view jsonl);
std::vector<harness::RunRecord> load_records(const std::string& path);

}  // namespace lbm::report
