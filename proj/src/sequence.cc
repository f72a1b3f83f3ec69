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

#include "cdlm/sequence.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cdlm {

Vocabulary::Vocabulary(int size, Token mask_id) : size_(size), mask_id_(mask_id) {
  if (size < 2) {
    throw std::invalid_argument("vocabulary needs at least 2 symbols, got " +
                                std::to_string(size));
  }
  if (mask_id < 0 || mask_id >= size) {
    throw std::invalid_argument("mask id " + std::to_string(mask_id) +
                                " outside vocabulary of size " +
                                std::to_string(size));
  }
}

TokenSequence::TokenSequence(std::vector<Token> tokens, const Vocabulary& vocab)
    : tokens_(std::move(tokens)), vocab_(vocab) {
  if (tokens_.empty()) throw std::invalid_argument("empty token sequence");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!vocab_.Contains(tokens_[i])) {
      throw std::invalid_argument("token " + std::to_string(tokens_[i]) +
                                  " at position " + std::to_string(i) +
                                  " outside vocabulary");
    }
  }
}

void TokenSequence::Set(int i, Token t) {
  if (!vocab_.Contains(t)) {
    throw std::invalid_argument("token " + std::to_string(t) +
                                " outside vocabulary");
  }
  tokens_.at(static_cast<std::size_t>(i)) = t;
}

bool TokenSequence::ContainsMask() const {
  return std::find(tokens_.begin(), tokens_.end(), vocab_.mask_id()) !=
         tokens_.end();
}

int TokenSequence::CountMasks() const {
  return static_cast<int>(
      std::count(tokens_.begin(), tokens_.end(), vocab_.mask_id()));
}

PositionSet TokenSequence::MaskedPositions() const {
  PositionSet out;
  for (int i = 0; i < size(); ++i) {
    if (IsMasked(i)) out.push_back(i);
  }
  return out;
}

bool IsSortedUnique(std::span<const int> positions) {
  return std::adjacent_find(positions.begin(), positions.end(),
                            [](int a, int b) { return a >= b; }) ==
         positions.end();
}

bool Contains(std::span<const int> sorted_positions, int pos) {
  return std::binary_search(sorted_positions.begin(), sorted_positions.end(),
                            pos);
}

}  // namespace cdlm
