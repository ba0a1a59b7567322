// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/pipeline/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "usdrecon/error.hpp"

namespace usdrecon {

namespace {

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, pos_ + 1, msg); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#' || s_[pos_] == '\r';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  std::size_t column() const { return pos_ + 1; }

  std::string key() {
    skip_ws();
    std::string out;
    for (;;) {
      std::string part;
      if (peek() == '"') {
        part = basic_string();
      } else {
        while (pos_ < s_.size() && bare_key_char(s_[pos_])) part.push_back(s_[pos_++]);
        if (part.empty()) fail("expected a key");
      }
      out += part;
      skip_ws();
      if (peek() != '.') return out;
      ++pos_;
      out.push_back('.');
      skip_ws();
    }
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  TomlEntry value() {
    skip_ws();
    TomlEntry e;
    e.line = line_;
    e.column = column();
    const char c = peek();
    if (c == '"') {
      if (s_.substr(pos_, 3) == "\"\"\"") fail("multi-line strings are not supported");
      e.value = basic_string();
    } else if (c == '\'') {
      ++pos_;
      const auto end = s_.find('\'', pos_);
      if (end == std::string_view::npos) fail("unterminated string");
      e.value = std::string(s_.substr(pos_, end - pos_));
      pos_ = end + 1;
    } else if (c == '[' || c == '{') {
      fail("arrays and inline tables are not supported");
    } else {
      std::size_t end = pos_;
      while (end < s_.size() && s_[end] != '#' && s_[end] != ' ' && s_[end] != '\t' &&
             s_[end] != '\r') {
        ++end;
      }
      const std::string word(s_.substr(pos_, end - pos_));
      if (word.empty()) fail("expected a value");
      e.value = scalar(word);
      pos_ = end;
    }
    if (!at_end_or_comment()) fail("unexpected text after value");
    return e;
  }

 private:
  std::variant<bool, long long, double, std::string> scalar(const std::string& word) {
    if (word == "true") return true;
    if (word == "false") return false;
    std::string w;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (word[i] != '_') {
        w.push_back(word[i]);
      } else if (i == 0 || i + 1 == word.size() || !std::isdigit(static_cast<unsigned char>(word[i - 1])) ||
                 !std::isdigit(static_cast<unsigned char>(word[i + 1]))) {
        fail("misplaced '_' in number");
      }
    }
    std::string_view body = w;
    const bool negative = !body.empty() && body.front() == '-';
    if (!body.empty() && (body.front() == '+' || body.front() == '-')) body.remove_prefix(1);
    if (body == "inf" || body == "nan") {
      const double v = body == "inf" ? std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::quiet_NaN();
      return negative ? -v : v;
    }
    if (body.empty() || !std::isdigit(static_cast<unsigned char>(body.front()))) {
      fail("invalid value '" + word + "'");
    }
    const bool is_float = body.find_first_of(".eE") != std::string_view::npos;
    if (!is_float) {
      long long v = 0;
      const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
      if (ec != std::errc() || end != body.data() + body.size()) fail("invalid integer '" + word + "'");
      return negative ? -v : v;
    }
    double v = 0.0;
    const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (ec != std::errc() || end != body.data() + body.size()) fail("invalid float '" + word + "'");
    return negative ? -v : v;
  }

  std::string basic_string() {
    ++pos_;  // opening quote
    std::string out;
    for (;;) {
      if (pos_ >= s_.size()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

std::map<std::string, TomlEntry> parse_toml_subset(std::string_view text) {
  std::map<std::string, TomlEntry> out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view raw =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    LineParser p(raw, line_no);
    if (p.at_end_or_comment()) continue;
    if (trim(raw).front() == '[') {
      p.expect('[');
      if (p.peek() == '[') p.fail("arrays of tables are not supported");
      section = p.key();
      p.expect(']');
      if (!p.at_end_or_comment()) p.fail("unexpected text after section header");
      continue;
    }
    const std::size_t key_column = p.column();
    const std::string key = p.key();
    p.expect('=');
    TomlEntry entry = p.value();
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) throw ParseError(line_no, key_column, "duplicate key '" + full + "'");
    out.emplace(full, std::move(entry));
  }
  return out;
}

}  // namespace usdrecon
