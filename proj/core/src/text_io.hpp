#pragma once

// Shared helpers for the line-oriented text formats.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rmab::detail {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_csv(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.emplace_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool try_parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  std::string copy(s);
  char* end = nullptr;
  out = std::strtod(copy.c_str(), &end);
  return end == copy.c_str() + copy.size();
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  if (!try_parse_double(s, v)) {
    throw std::runtime_error("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::size_t parse_count(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("expected a non-negative integer, got '" + std::string(s) +
                             "'");
  }
  return v;
}

// Reads non-blank lines, skipping lines that start with '#'.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      const auto t = trim(raw);
      if (t.empty() || t.front() == '#') continue;
      out.assign(t);
      return true;
    }
    return false;
  }

  std::string require() {
    std::string s;
    if (!next(s)) throw std::runtime_error("unexpected end of input");
    return s;
  }

  std::vector<std::string> next_csv() { return split_csv(require()); }

  // Reads a line of the form "<key> <tokens...>" and returns the tokens.
  std::vector<std::string> expect_tokens(std::string_view key) {
    auto tokens = split_whitespace(require());
    if (tokens.empty() || tokens.front() != key) {
      throw std::runtime_error("line " + std::to_string(line_) + ": expected '" +
                               std::string(key) + "'");
    }
    tokens.erase(tokens.begin());
    return tokens;
  }

  std::size_t expect_count(std::string_view key) {
    const auto t = expect_tokens(key);
    if (t.size() != 1) {
      throw std::runtime_error("line " + std::to_string(line_) + ": '" +
                               std::string(key) + "' takes one value");
    }
    return parse_count(t[0]);
  }

  double expect_double(std::string_view key) {
    const auto t = expect_tokens(key);
    if (t.size() != 1) {
      throw std::runtime_error("line " + std::to_string(line_) + ": '" +
                               std::string(key) + "' takes one value");
    }
    return parse_double(t[0]);
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace rmab::detail
