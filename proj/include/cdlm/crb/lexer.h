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

// Python lexer with token classification for type-preserving corruption.
//
// Categories:
//  * operator:   the comparison/arithmetic set {+ - * / % < > <= >= == !=}
//  * identifier: names that are not keywords
//  * literal:    decimal numbers and the booleans True/False
//  * other:      keywords, strings, remaining punctuation
//
// Operators are matched by maximal munch over the full Python operator
// inventory, so "<=" is one token and "**" is never two "*" tokens. Comments
// and whitespace are not tokens; they survive as the text between spans.
//
// Every identifier carries the qualified name of the innermost enclosing
// def or class ("<module>" at top level). Scopes follow indentation.

#ifndef CDLM_CRB_LEXER_H_
#define CDLM_CRB_LEXER_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cdlm::crb {

enum class TokenCategory { kOperator, kIdentifier, kLiteral, kOther };

std::string CategoryName(TokenCategory c);
// Throws std::invalid_argument for an unknown name.
TokenCategory ParseCategory(const std::string& s);

enum class LiteralKind { kNone, kDecimal, kBoolean, kOtherNumber };

struct ClassifiedToken {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the source, [begin, end)
  std::size_t end = 0;
  TokenCategory category = TokenCategory::kOther;
  LiteralKind literal_kind = LiteralKind::kNone;
  std::string scope_id;
  int line = 1;
  int col = 1;

  friend bool operator==(const ClassifiedToken&,
                         const ClassifiedToken&) = default;
};

inline constexpr const char* kModuleScope = "<module>";

class LexError : public std::runtime_error {
 public:
  LexError(const std::string& message, int line, int col);
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// Throws LexError on an unterminated string, a character outside the
// language, or unbalanced brackets.
std::vector<ClassifiedToken> TokenizeClassify(std::string_view source);

// The operator class set, in a fixed order.
const std::vector<std::string>& OperatorSet();
bool IsOperatorClass(std::string_view text);
bool IsKeyword(std::string_view text);
bool IsBuiltinName(std::string_view text);

// Source with each token's span replaced by texts[i]; text between tokens is
// kept. Throws std::invalid_argument unless texts.size() == tokens.size().
std::string Splice(std::string_view source,
                   const std::vector<ClassifiedToken>& tokens,
                   const std::vector<std::string>& texts);

}  // namespace cdlm::crb

#endif  // CDLM_CRB_LEXER_H_
