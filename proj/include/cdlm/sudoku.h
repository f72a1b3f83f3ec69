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
// Sudoku boards as 81-token sequences over {mask, 1..9}: generation,
// constraint validation, dataset files and the corruptions used by the
// localization, correction and completion experiments.

#ifndef CDLM_SUDOKU_H_
#define CDLM_SUDOKU_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cdlm/rng.h"
#include "cdlm/sequence.h"

namespace cdlm::sudoku {

inline constexpr int kCells = 81;
inline constexpr Token kMask = 0;

// Vocabulary of size 10 with the mask at index 0 and digit d at index d.
const Vocabulary& Vocab();

using Board = TokenSequence;

enum class GroupKind { kRow, kColumn, kBox };

struct Violation {
  GroupKind kind;
  int index;  // 0-based row, column or box
  Token digit;
};

struct ValidationResult {
  bool valid = true;
  std::vector<Violation> violations;
};

// Every group holding a repeated non-mask digit, once per (group, digit).
ValidationResult ValidateBoard(const Board& b);

// True when b has no masks and satisfies all 27 groups.
bool IsSolution(const Board& b);

// Complete solution by backtracking with a seeded random digit order.
Board GenerateSolution(Rng rng);

// `count` distinct solutions drawn from rng.Split(0), rng.Split(1), ...
// Boards present in `exclude` are skipped.
std::vector<Board> GenerateDistinct(int count, const Rng& rng,
                                    const std::vector<Board>& exclude = {});

// round-half-up(81 * ratio). Throws std::invalid_argument outside [0, 1].
int CellCount(double ratio);

// One board per line, 81 characters; digits 1-9 and '.' for a mask.
std::string FormatBoard(const Board& b);
Board ParseBoard(const std::string& line);
void WriteBoards(const std::string& path, const std::vector<Board>& boards);
std::vector<Board> ReadBoards(const std::string& path);

struct NoisyBoard {
  Board board;
  PositionSet noisy;  // cells whose digit was replaced
};

// Replaces CellCount(noise_ratio) uniformly chosen cells with a digit drawn
// uniformly from {1..9} minus the original.
NoisyBoard AddUniformNoise(const Board& solution, double noise_ratio, Rng rng);

struct EditableSpec {
  double noise_ratio = 0.0;
  double editable_ratio = 0.0;
  PositionSet editable_set;
  // Set when CellCount(editable_ratio) < |noisy| and the set was clamped to
  // the noisy cells.
  bool clamped = false;
};

// Editable set holding every noisy cell plus uniformly chosen clean cells up
// to CellCount(editable_ratio) in total.
EditableSpec MakeEditableSpec(const PositionSet& noisy, double noise_ratio,
                              double editable_ratio, Rng rng);

// Masks CellCount(mask_ratio) uniformly chosen cells.
Board MaskCells(const Board& solution, double mask_ratio, Rng rng);

struct CellStats {
  // Fraction of all cells equal to the solution; masked cells count wrong.
  double accuracy = 0.0;
  double mean_masked_cells = 0.0;
};

CellStats CellAccuracy(const std::vector<Board>& finals,
                       const std::vector<Board>& solutions);

// Uniform sample of k distinct positions from [0, n), sorted.
PositionSet SamplePositions(int n, int k, Rng& rng);

}  // namespace cdlm::sudoku

#endif  // CDLM_SUDOKU_H_
