#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lbm::harness {

/// Flat TOML subset: `key = value` lines, `#` comments, no tables.
/// Values are strings, integers, floats, booleans or one-level arrays of those.
struct TomlValue;
using TomlArray = std::vector<TomlValue>;

struct TomlValue {
  std::variant<bool, std::int64_t, double, std::string, TomlArray> v;

  [[nodiscard]] bool is_array() const { return std::holds_alternative<TomlArray>(v); }
  [[nodiscard]] std::string type_name() const;
  friend bool operator==(const TomlValue&, const TomlValue&) = default;
};

using TomlDocument = std::map<std::string, TomlValue, std::less<>>;

class TomlError : public std::runtime_error {
 public:
  TomlError(int line, const std::string& what);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

TomlDocument parse_toml(std::string_view text);
TomlDocument load_toml(const std::string& path);

}  // namespace lbm::harness
