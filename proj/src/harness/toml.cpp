#include "lbm/harness/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace lbm::harness {

std::string TomlValue::type_name() const {
  static constexpr const char* names[] = {"boolean", "integer", "float", "string", "array"};
  return names[v.index()];
}

TomlError::TomlError(int line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

namespace {

class Parser {
 public:
  Parser(std::string_view line, int number) : s_(line), line_(number) {}

  TomlValue value() {
    skip_ws();
    if (eof()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return {basic_string()};
    if (c == '\'') return {literal_string()};
    if (c == '[') return {array()};
    return scalar();
  }

  void finish() {
    skip_ws();
    if (!eof() && s_[pos_] != '#') fail(fmt::format("unexpected text '{}'", s_.substr(pos_)));
  }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                      s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a bare key");
    std::string k(s_.substr(start, pos_ - start));
    skip_ws();
    if (eof() || s_[pos_] != '=') fail(fmt::format("expected '=' after key '{}'", k));
    ++pos_;
    return k;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw TomlError(line_, what); }
  [[nodiscard]] bool eof() const { return pos_ >= s_.size(); }
  void skip_ws() {
    while (!eof() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string basic_string() {
    ++pos_;
    std::string out;
    while (!eof() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        switch (s_[pos_++]) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape");
        }
      }
      out.push_back(c);
    }
    if (eof()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string literal_string() {
    ++pos_;
    const std::size_t end = s_.find('\'', pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  TomlArray array() {
    ++pos_;
    TomlArray out;
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      TomlValue item = value();
      if (item.is_array()) fail("nested arrays are not supported");
      out.push_back(std::move(item));
      skip_ws();
      if (!eof() && s_[pos_] == ',') {
        ++pos_;
      } else if (eof() || s_[pos_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  TomlValue scalar() {
    const std::size_t start = pos_;
    while (!eof() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t') {
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return {true};
    if (tok == "false") return {false};
    std::string digits;
    for (char c : tok) {
      if (c != '_') digits.push_back(c);
    }
    const char* b = digits.data();
    const char* e = b + digits.size();
    if (!digits.empty() && digits[0] == '+') ++b;
    const bool floating = digits.find_first_of(".eE") != std::string::npos ||
                          digits == "inf" || digits == "nan";
    if (!floating) {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(b, e, i);
      if (ec == std::errc() && p == e) return {i};
    } else {
      double d = 0;
      auto [p, ec] = std::from_chars(b, e, d);
      if (ec == std::errc() && p == e) return {d};
    }
    fail(fmt::format("invalid value '{}'", tok));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

}  // namespace

TomlDocument parse_toml(std::string_view text) {
  TomlDocument doc;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    start = end + 1;

    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    if (line[first] == '[') throw TomlError(number, "tables are not supported");
    Parser p(line, number);
    std::string key = p.key();
    TomlValue value = p.value();
    p.finish();
    if (doc.contains(key)) throw TomlError(number, fmt::format("duplicate key '{}'", key));
    doc.emplace(std::move(key), std::move(value));
  }
  return doc;
}

TomlDocument load_toml(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

}  // namespace lbm::harness
