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

#ifndef CDLM_SEQUENCE_H_
#define CDLM_SEQUENCE_H_

#include <cstdint>
#include <span>
#include <vector>

namespace cdlm {

using Token = std::int32_t;

// Ordered, duplicate-free list of 0-based positions.
using PositionSet = std::vector<int>;

// Symbol inventory with one absorbing mask symbol that never occurs in clean
// data.
class Vocabulary {
 public:
  // Throws std::invalid_argument unless size >= 2 and 0 <= mask_id < size.
  Vocabulary(int size, Token mask_id);

  int size() const { return size_; }
  Token mask_id() const { return mask_id_; }
  bool Contains(Token t) const { return t >= 0 && t < size_; }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  int size_;
  Token mask_id_;
};

class TokenSequence {
 public:
  // Throws std::invalid_argument on an empty sequence or out-of-range token.
  TokenSequence(std::vector<Token> tokens, const Vocabulary& vocab);

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  std::span<const Token> span() const { return tokens_; }
  int size() const { return static_cast<int>(tokens_.size()); }
  Token operator[](int i) const { return tokens_[static_cast<std::size_t>(i)]; }

  // Throws std::invalid_argument for an out-of-range token.
  void Set(int i, Token t);

  bool IsMasked(int i) const { return (*this)[i] == vocab_.mask_id(); }
  bool ContainsMask() const;
  int CountMasks() const;
  PositionSet MaskedPositions() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<Token> tokens_;
  Vocabulary vocab_;
};

bool IsSortedUnique(std::span<const int> positions);
bool Contains(std::span<const int> sorted_positions, int pos);

}  // namespace cdlm

#endif  // CDLM_SEQUENCE_H_
