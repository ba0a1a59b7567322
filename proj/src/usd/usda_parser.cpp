// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cctype>
#include <set>

#include "usdrecon/error.hpp"
#include "usdrecon/usd/usda.hpp"

namespace usdrecon {

namespace {

constexpr int kMaxDepth = 128;

enum class Tok { kIdent, kNumber, kString, kAsset, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;  // decoded for strings/assets
  char punct = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  void expect_header() {
    constexpr std::string_view kHeader = "#usda 1.0";
    if (text_.substr(0, kHeader.size()) != kHeader) {
      throw ParseError(1, 1, "expected '#usda 1.0' header");
    }
    while (pos_ < text_.size() && text_[pos_] != '\n') {
      if (pos_ >= kHeader.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        throw ParseError(1, pos_ + 1, "unexpected text after header");
      }
      advance();
    }
  }

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    if (c == '"' || c == '\'') {
      t.kind = Tok::kString;
      t.text = read_string(c, t);
    } else if (c == '@') {
      t.kind = Tok::kAsset;
      advance();
      while (pos_ < text_.size() && text_[pos_] != '@') {
        if (text_[pos_] == '\n') throw ParseError(t.line, t.column, "unterminated asset path");
        t.text.push_back(text_[pos_]);
        advance();
      }
      if (pos_ >= text_.size()) throw ParseError(t.line, t.column, "unterminated asset path");
      advance();
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      t.kind = Tok::kNumber;
      t.text = read_number(t);
    } else if (ident_start(c)) {
      t.kind = Tok::kIdent;
      while (pos_ < text_.size() && ident_char(text_[pos_])) {
        t.text.push_back(text_[pos_]);
        advance();
      }
    } else if (std::string_view("(){}[]=,;").find(c) != std::string_view::npos) {
      t.kind = Tok::kPunct;
      t.punct = c;
      t.text = std::string(1, c);
      advance();
    } else {
      throw ParseError(t.line, t.column,
                       std::string("unexpected character '") +
                           (std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c)
                                                                         : std::string("?")) +
                           "'");
    }
    return t;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string read_number(const Token& t) {
    std::string s;
    if (text_[pos_] == '-' || text_[pos_] == '+') {
      s.push_back(text_[pos_]);
      advance();
    }
    // Signed inf / nan.
    if (pos_ < text_.size() && ident_start(text_[pos_])) {
      std::string word;
      while (pos_ < text_.size() && ident_char(text_[pos_])) {
        word.push_back(text_[pos_]);
        advance();
      }
      if (word != "inf" && word != "nan") throw ParseError(t.line, t.column, "malformed number");
      return s + word;
    }
    bool digits = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits = true;
      } else if (c == '.' || c == 'e' || c == 'E') {
      } else if ((c == '-' || c == '+') && !s.empty() && (s.back() == 'e' || s.back() == 'E')) {
      } else {
        break;
      }
      s.push_back(c);
      advance();
    }
    if (!digits) throw ParseError(t.line, t.column, "malformed number");
    return s;
  }

  std::string read_string(char quote, const Token& t) {
    advance();
    std::string out;
    for (;;) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') {
        throw ParseError(t.line, t.column, "unterminated string");
      }
      const char c = text_[pos_];
      advance();
      if (c == quote) return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) throw ParseError(t.line, t.column, "unterminated string");
      const char e = text_[pos_];
      advance();
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case 'x': {
          int v = 0;
          for (int k = 0; k < 2; ++k) {
            if (pos_ >= text_.size() || !std::isxdigit(static_cast<unsigned char>(text_[pos_]))) {
              throw ParseError(line_, column_, "bad \\x escape");
            }
            const char h = text_[pos_];
            v = v * 16 + (std::isdigit(static_cast<unsigned char>(h))
                              ? h - '0'
                              : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
            advance();
          }
          out.push_back(static_cast<char>(v));
          break;
        }
        default:
          throw ParseError(line_, column_ - 1, std::string("unknown escape '\\") + e + "'");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {
    lex_.expect_header();
    cur_ = lex_.next();
  }

  UsdaStage parse() {
    UsdaStage stage;
    if (is_punct('(')) stage.metadata = parse_metadata_block(0);
    std::set<std::string> names;
    while (cur_.kind != Tok::kEnd) {
      if (cur_.kind != Tok::kIdent) fail("expected prim specifier");
      stage.prims.push_back(parse_prim("", names, 0));
    }
    return stage;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(cur_.line, cur_.column,
                     msg + (cur_.kind == Tok::kEnd ? " (found end of input)"
                                                   : " (found '" + cur_.text + "')"));
  }

  bool is_punct(char c) const { return cur_.kind == Tok::kPunct && cur_.punct == c; }
  void expect_punct(char c) {
    if (!is_punct(c)) fail(std::string("expected '") + c + "'");
    cur_ = lex_.next();
  }
  std::string expect_ident(const char* what) {
    if (cur_.kind != Tok::kIdent) fail(std::string("expected ") + what);
    std::string s = cur_.text;
    cur_ = lex_.next();
    return s;
  }

  UsdaValue parse_value(int depth) {
    if (depth > kMaxDepth) fail("nesting too deep");
    UsdaValue v;
    switch (cur_.kind) {
      case Tok::kNumber:
      case Tok::kIdent: {
        if (cur_.kind == Tok::kIdent && cur_.text != "inf" && cur_.text != "nan") {
          v = UsdaValue::identifier(cur_.text);
          break;
        }
        v.kind = UsdaValue::Kind::kNumber;
        v.text = cur_.text;
        std::string_view s = v.text;
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v.number);
        if (ec == std::errc::result_out_of_range) {
          v.number = (s.front() == '-' ? -1.0 : 1.0) * std::numeric_limits<double>::infinity();
        } else if (ec != std::errc() || end != s.data() + s.size()) {
          fail("malformed number");
        }
        break;
      }
      case Tok::kString:
        v = UsdaValue::string(cur_.text);
        break;
      case Tok::kAsset:
        v = UsdaValue::asset(cur_.text);
        break;
      case Tok::kPunct:
        if (cur_.punct == '(' || cur_.punct == '[') {
          const char close = cur_.punct == '(' ? ')' : ']';
          v.kind = cur_.punct == '(' ? UsdaValue::Kind::kTuple : UsdaValue::Kind::kArray;
          cur_ = lex_.next();
          while (!is_punct(close)) {
            v.items.push_back(parse_value(depth + 1));
            if (is_punct(',')) {
              cur_ = lex_.next();
            } else if (!is_punct(close)) {
              fail(std::string("expected ',' or '") + close + "'");
            }
          }
          cur_ = lex_.next();
          return v;
        }
        fail("expected a value");
      case Tok::kEnd:
        fail("expected a value");
    }
    cur_ = lex_.next();
    return v;
  }

  std::vector<UsdaMetadata> parse_metadata_block(int depth) {
    expect_punct('(');
    std::vector<UsdaMetadata> out;
    while (!is_punct(')')) {
      if (is_punct(';')) {
        cur_ = lex_.next();
        continue;
      }
      UsdaMetadata m;
      std::string word = expect_ident("metadata key");
      if (word == "prepend" || word == "append" || word == "add" || word == "delete" ||
          word == "reorder") {
        m.list_op = word;
        word = expect_ident("metadata key");
      }
      m.key = word;
      expect_punct('=');
      m.value = parse_value(depth + 1);
      out.push_back(std::move(m));
    }
    cur_ = lex_.next();
    return out;
  }

  UsdaPrim parse_prim(const std::string& parent_path, std::set<std::string>& sibling_names,
                      int depth) {
    if (depth > kMaxDepth) fail("nesting too deep");
    const std::size_t open_line = cur_.line;
    UsdaPrim prim;
    prim.specifier = cur_.text;
    if (prim.specifier != "def" && prim.specifier != "over" && prim.specifier != "class") {
      fail("expected 'def', 'over' or 'class'");
    }
    cur_ = lex_.next();
    if (cur_.kind == Tok::kIdent) {
      prim.type_name = cur_.text;
      cur_ = lex_.next();
    }
    if (cur_.kind != Tok::kString) fail("expected quoted prim name");
    prim.name = cur_.text;
    if (!is_valid_prim_name(prim.name)) fail("invalid prim name");
    const std::string path = parent_path + "/" + prim.name;
    if (!sibling_names.insert(prim.name).second) fail("duplicate prim path " + path);
    cur_ = lex_.next();
    if (is_punct('(')) prim.metadata = parse_metadata_block(depth);
    expect_punct('{');

    std::set<std::string> child_names;
    for (;;) {
      if (cur_.kind == Tok::kEnd) {
        throw ParseError(cur_.line, cur_.column,
                         "unclosed block for prim " + path + " opened at line " +
                             std::to_string(open_line));
      }
      if (is_punct('}')) break;
      if (cur_.kind != Tok::kIdent) fail("expected prim or attribute");
      if (cur_.text == "def" || cur_.text == "over" || cur_.text == "class") {
        prim.children.push_back(parse_prim(path, child_names, depth + 1));
      } else {
        prim.attributes.push_back(parse_attribute(depth + 1));
      }
    }
    cur_ = lex_.next();
    return prim;
  }

  UsdaAttribute parse_attribute(int depth) {
    UsdaAttribute a;
    if (cur_.kind == Tok::kIdent && cur_.text == "custom") {
      a.custom = true;
      cur_ = lex_.next();
    }
    if (cur_.kind == Tok::kIdent && cur_.text == "uniform") {
      a.uniform = true;
      cur_ = lex_.next();
    }
    a.type = expect_ident("attribute type");
    if (is_punct('[')) {
      cur_ = lex_.next();
      expect_punct(']');
      a.type += "[]";
    }
    a.name = expect_ident("attribute name");
    if (is_punct('=')) {
      cur_ = lex_.next();
      a.value = parse_value(depth);
    }
    if (is_punct('(')) a.metadata = parse_metadata_block(depth);
    return a;
  }

  Lexer lex_;
  Token cur_;
};

}  // namespace

bool is_valid_prim_name(std::string_view name) {
  if (name.empty() || !ident_start(name.front())) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

UsdaStage parse_usda(std::string_view text) { return Parser(text).parse(); }

}  // namespace usdrecon
