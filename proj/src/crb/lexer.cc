// Copyright 2026 The CDLM Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cdlm/crb/lexer.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <unordered_set>

namespace cdlm::crb {

namespace {

const std::unordered_set<std::string_view>& Keywords() {
  static const std::unordered_set<std::string_view> kSet = {
      "False",  "None",     "True",    "and",    "as",     "assert",
      "async",  "await",    "break",   "class",  "continue", "def",
      "del",    "elif",     "else",    "except", "finally", "for",
      "from",   "global",   "if",      "import", "in",     "is",
      "lambda", "nonlocal", "not",     "or",     "pass",   "raise",
      "return", "try",      "while",   "with",   "yield"};
  return kSet;
}

const std::unordered_set<std::string_view>& Builtins() {
  static const std::unordered_set<std::string_view> kSet = {
      "abs",       "all",        "any",         "bin",       "bool",
      "bytes",     "callable",   "chr",         "dict",      "dir",
      "divmod",    "enumerate",  "filter",      "float",     "format",
      "frozenset", "getattr",    "hasattr",     "hash",      "hex",
      "id",        "input",      "int",         "isinstance", "issubclass",
      "iter",      "len",        "list",        "map",       "max",
      "min",       "next",       "object",      "oct",       "ord",
      "pow",       "print",      "range",       "repr",      "reversed",
      "round",     "set",        "setattr",     "slice",     "sorted",
      "str",       "sum",        "super",       "tuple",     "type",
      "zip",       "Exception",  "ValueError",  "TypeError", "KeyError",
      "IndexError", "ZeroDivisionError", "RuntimeError", "StopIteration"};
  return kSet;
}

// Longest first within each length so a linear scan is maximal munch.
constexpr std::array<std::string_view, 47> kPunctuation = {
    "**=", "//=", ">>=", "<<=", "...", "**", "//", ">>", "<<", "<=", ">=",
    "==",  "!=",  "->",  ":=",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=",
    "^=",  "@=",  "+",   "-",   "*",   "/",  "%",  "<",  ">",  "=",  "(",
    ")",   "[",   "]",   "{",   "}",   ",",  ":",  ";",  ".",  "@",  "~",
    "^",   "&",   "|"};

bool IsNameStart(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool IsNameChar(unsigned char c) { return IsNameStart(c) || std::isdigit(c); }

bool IsStringPrefix(std::string_view s) {
  if (s.size() > 2) return false;
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(c)));
  static const std::unordered_set<std::string> kPrefixes = {
      "r", "u", "b", "f", "br", "rb", "fr", "rf"};
  return kPrefixes.count(lower) > 0;
}

struct Scope {
  std::string name;
  int indent;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<ClassifiedToken> Run() {
    at_line_start_ = true;
    while (pos_ < src_.size()) {
      if (at_line_start_ && brackets_.empty()) {
        HandleIndent();
        if (pos_ >= src_.size()) break;
      }
      const unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (c == '\n') {
        Advance(1);
        if (brackets_.empty()) at_line_start_ = true;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        Advance(1);
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') Advance(1);
        continue;
      }
      if (c == '\\') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          Advance(2);
          continue;
        }
        if (pos_ + 2 < src_.size() && src_[pos_ + 1] == '\r' &&
            src_[pos_ + 2] == '\n') {
          Advance(3);
          continue;
        }
        throw LexError("stray backslash", line_, col_);
      }
      if (c == '"' || c == '\'') {
        LexString(pos_, line_, col_);
        continue;
      }
      if (std::isdigit(c) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        LexNumber();
        continue;
      }
      if (IsNameStart(c)) {
        LexName();
        continue;
      }
      LexPunctuation();
    }
    if (!brackets_.empty()) {
      const Open& o = brackets_.back();
      throw LexError(std::string("unclosed '") + o.ch + "'", o.line, o.col);
    }
    return std::move(tokens_);
  }

 private:
  struct Open {
    char ch;
    int line;
    int col;
  };

  void Advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void HandleIndent() {
    at_line_start_ = false;
    int indent = 0;
    std::size_t p = pos_;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' ||
                               src_[p] == '\f' || src_[p] == '\r')) {
      if (src_[p] == '\t') {
        indent = (indent / 8 + 1) * 8;
      } else if (src_[p] == ' ') {
        ++indent;
      }
      ++p;
    }
    Advance(p - pos_);
    if (pos_ >= src_.size() || src_[pos_] == '\n' || src_[pos_] == '#') {
      return;
    }
    line_indent_ = indent;
    while (!scopes_.empty() && scopes_.back().indent >= indent) {
      scopes_.pop_back();
    }
  }

  std::string CurrentScope() const {
    return scopes_.empty() ? std::string(kModuleScope) : scopes_.back().name;
  }

  void Emit(std::size_t begin, TokenCategory cat, LiteralKind kind, int line,
            int col) {
    ClassifiedToken t;
    t.text = std::string(src_.substr(begin, pos_ - begin));
    t.begin = begin;
    t.end = pos_;
    t.category = cat;
    t.literal_kind = kind;
    t.scope_id = CurrentScope();
    t.line = line;
    t.col = col;
    tokens_.push_back(std::move(t));
  }

  // The opening quote is at pos_; a prefix, if any, starts at `begin`.
  void LexString(std::size_t begin, int line, int col) {
    const char quote = src_[pos_];
    const bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == quote &&
                        src_[pos_ + 2] == quote;
    Advance(triple ? 3 : 1);
    while (true) {
      if (pos_ >= src_.size()) {
        throw LexError("unterminated string", line, col);
      }
      const char c = src_[pos_];
      if (c == '\\') {
        Advance(2);
        continue;
      }
      if (!triple && c == '\n') {
        throw LexError("unterminated string", line, col);
      }
      if (c == quote) {
        if (!triple) {
          Advance(1);
          break;
        }
        if (pos_ + 2 < src_.size() && src_[pos_ + 1] == quote &&
            src_[pos_ + 2] == quote) {
          Advance(3);
          break;
        }
      }
      Advance(1);
    }
    pending_scope_name_ = false;
    Emit(begin, TokenCategory::kOther, LiteralKind::kNone, line, col);
  }

  void LexNumber() {
    const std::size_t begin = pos_;
    const int line = line_;
    const int col = col_;
    auto peek = [&](std::size_t off) -> unsigned char {
      return pos_ + off < src_.size()
                 ? static_cast<unsigned char>(src_[pos_ + off])
                 : 0;
    };
    bool decimal = true;
    if (peek(0) == '0' && (std::tolower(peek(1)) == 'x' ||
                           std::tolower(peek(1)) == 'o' ||
                           std::tolower(peek(1)) == 'b')) {
      Advance(2);
      while (std::isxdigit(peek(0)) || peek(0) == '_') Advance(1);
      decimal = false;
    } else {
      int dots = 0;
      while (std::isdigit(peek(0)) || peek(0) == '_' || peek(0) == '.') {
        if (peek(0) == '_') decimal = false;
        if (peek(0) == '.') {
          if (dots == 1) break;
          ++dots;
        }
        Advance(1);
      }
      if (std::tolower(peek(0)) == 'e' &&
          (std::isdigit(peek(1)) ||
           ((peek(1) == '+' || peek(1) == '-') && std::isdigit(peek(2))))) {
        decimal = false;
        Advance(2);
        while (std::isdigit(peek(0)) || peek(0) == '_') Advance(1);
      }
      if (std::tolower(peek(0)) == 'j') {
        decimal = false;
        Advance(1);
      }
    }
    if (IsNameChar(peek(0))) {
      throw LexError("invalid numeric literal", line, col);
    }
    pending_scope_name_ = false;
    Emit(begin, TokenCategory::kLiteral,
         decimal ? LiteralKind::kDecimal : LiteralKind::kOtherNumber, line,
         col);
  }

  void LexName() {
    const std::size_t begin = pos_;
    const int line = line_;
    const int col = col_;
    while (pos_ < src_.size() &&
           IsNameChar(static_cast<unsigned char>(src_[pos_]))) {
      Advance(1);
    }
    const std::string_view text = src_.substr(begin, pos_ - begin);
    if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') &&
        IsStringPrefix(text)) {
      LexString(begin, line, col);
      return;
    }
    if (text == "True" || text == "False") {
      pending_scope_name_ = false;
      Emit(begin, TokenCategory::kLiteral, LiteralKind::kBoolean, line, col);
      return;
    }
    if (Keywords().count(text) > 0) {
      pending_scope_name_ = text == "def" || text == "class";
      Emit(begin, TokenCategory::kOther, LiteralKind::kNone, line, col);
      return;
    }
    Emit(begin, TokenCategory::kIdentifier, LiteralKind::kNone, line, col);
    if (pending_scope_name_) {
      pending_scope_name_ = false;
      const std::string parent = CurrentScope();
      const std::string name(text);
      scopes_.push_back(
          {parent == kModuleScope ? name : parent + "." + name, line_indent_});
    }
  }

  void LexPunctuation() {
    const std::size_t begin = pos_;
    const int line = line_;
    const int col = col_;
    const std::string_view rest = src_.substr(pos_);
    for (std::string_view p : kPunctuation) {
      if (rest.substr(0, p.size()) != p) continue;
      Advance(p.size());
      if (p == "(" || p == "[" || p == "{") {
        brackets_.push_back({p[0], line, col});
      } else if (p == ")" || p == "]" || p == "}") {
        const char want = p == ")" ? '(' : p == "]" ? '[' : '{';
        if (brackets_.empty() || brackets_.back().ch != want) {
          throw LexError(std::string("unbalanced '") + p[0] + "'", line, col);
        }
        brackets_.pop_back();
      }
      pending_scope_name_ = false;
      Emit(begin,
           IsOperatorClass(p) ? TokenCategory::kOperator : TokenCategory::kOther,
           LiteralKind::kNone, line, col);
      return;
    }
    throw LexError(std::string("unexpected character '") + src_[pos_] + "'",
                   line, col);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  bool at_line_start_ = true;
  int line_indent_ = 0;
  bool pending_scope_name_ = false;
  std::vector<Open> brackets_;
  std::vector<Scope> scopes_;
  std::vector<ClassifiedToken> tokens_;
};

}  // namespace

std::string CategoryName(TokenCategory c) {
  switch (c) {
    case TokenCategory::kOperator:
      return "operator";
    case TokenCategory::kIdentifier:
      return "identifier";
    case TokenCategory::kLiteral:
      return "literal";
    case TokenCategory::kOther:
      return "other";
  }
  return "other";
}

TokenCategory ParseCategory(const std::string& s) {
  if (s == "operator") return TokenCategory::kOperator;
  if (s == "identifier") return TokenCategory::kIdentifier;
  if (s == "literal") return TokenCategory::kLiteral;
  if (s == "other") return TokenCategory::kOther;
  throw std::invalid_argument("unknown token category '" + s + "'");
}

LexError::LexError(const std::string& message, int line, int col)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) +
                         ": " + message),
      line_(line),
      col_(col) {}

std::vector<ClassifiedToken> TokenizeClassify(std::string_view source) {
  return Lexer(source).Run();
}

const std::vector<std::string>& OperatorSet() {
  static const std::vector<std::string> kOps = {
      "+", "-", "*", "/", "%", "<", ">", "<=", ">=", "==", "!="};
  return kOps;
}

bool IsOperatorClass(std::string_view text) {
  const auto& ops = OperatorSet();
  return std::find(ops.begin(), ops.end(), text) != ops.end();
}

bool IsKeyword(std::string_view text) { return Keywords().count(text) > 0; }

bool IsBuiltinName(std::string_view text) {
  return Builtins().count(text) > 0;
}

std::string Splice(std::string_view source,
                   const std::vector<ClassifiedToken>& tokens,
                   const std::vector<std::string>& texts) {
  if (texts.size() != tokens.size()) {
    throw std::invalid_argument("Splice: text count does not match tokens");
  }
  std::string out;
  out.reserve(source.size() + 16);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.append(source.substr(cursor, tokens[i].begin - cursor));
    out.append(texts[i]);
    cursor = tokens[i].end;
  }
  out.append(source.substr(cursor));
  return out;
}

}  // namespace cdlm::crb
