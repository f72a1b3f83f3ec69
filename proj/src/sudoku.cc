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
#include "cdlm/sudoku.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace cdlm::sudoku {

namespace {

int BoxOf(int cell) { return (cell / 27) * 3 + (cell % 9) / 3; }

class Solver {
 public:
  explicit Solver(Rng& rng) : rng_(rng) {}

  bool Fill(int cell) {
    if (cell == kCells) return true;
    const int r = cell / 9;
    const int c = cell % 9;
    const int b = BoxOf(cell);
    std::array<int, 9> digits;
    std::iota(digits.begin(), digits.end(), 1);
    for (int i = 8; i > 0; --i) {
      const int j = static_cast<int>(rng_.UniformInt(static_cast<std::uint32_t>(i + 1)));
      std::swap(digits[i], digits[j]);
    }
    for (int d : digits) {
      const unsigned bit = 1u << d;
      if ((rows_[r] | cols_[c] | boxes_[b]) & bit) continue;
      rows_[r] |= bit;
      cols_[c] |= bit;
      boxes_[b] |= bit;
      cells_[cell] = d;
      if (Fill(cell + 1)) return true;
      rows_[r] &= ~bit;
      cols_[c] &= ~bit;
      boxes_[b] &= ~bit;
    }
    return false;
  }

  std::vector<Token> cells() const {
    return std::vector<Token>(cells_.begin(), cells_.end());
  }

 private:
  Rng& rng_;
  std::array<unsigned, 9> rows_{};
  std::array<unsigned, 9> cols_{};
  std::array<unsigned, 9> boxes_{};
  std::array<Token, kCells> cells_{};
};

void CheckLength(const Board& b) {
  if (b.size() != kCells) {
    throw std::invalid_argument("a board has 81 cells, got " +
                                std::to_string(b.size()));
  }
}

}  // namespace

const Vocabulary& Vocab() {
  static const Vocabulary v(10, kMask);
  return v;
}

ValidationResult ValidateBoard(const Board& b) {
  CheckLength(b);
  ValidationResult out;
  auto scan = [&](GroupKind kind, int index, auto cell_at) {
    std::array<int, 10> seen{};
    for (int k = 0; k < 9; ++k) {
      const Token d = b[cell_at(k)];
      if (d != kMask) ++seen[static_cast<std::size_t>(d)];
    }
    for (Token d = 1; d <= 9; ++d) {
      if (seen[static_cast<std::size_t>(d)] > 1) {
        out.violations.push_back({kind, index, d});
      }
    }
  };
  for (int i = 0; i < 9; ++i) {
    scan(GroupKind::kRow, i, [i](int k) { return i * 9 + k; });
    scan(GroupKind::kColumn, i, [i](int k) { return k * 9 + i; });
    scan(GroupKind::kBox, i, [i](int k) {
      return (i / 3) * 27 + (i % 3) * 3 + (k / 3) * 9 + k % 3;
    });
  }
  out.valid = out.violations.empty();
  return out;
}

bool IsSolution(const Board& b) {
  return b.size() == kCells && !b.ContainsMask() && ValidateBoard(b).valid;
}

Board GenerateSolution(Rng rng) {
  Solver solver(rng);
  if (!solver.Fill(0)) throw std::logic_error("backtracking failed");
  return Board(solver.cells(), Vocab());
}

std::vector<Board> GenerateDistinct(int count, const Rng& rng,
                                    const std::vector<Board>& exclude) {
  if (count < 0) throw std::invalid_argument("negative board count");
  std::set<std::vector<Token>> seen;
  for (const Board& b : exclude) seen.insert(b.tokens());
  std::vector<Board> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; static_cast<int>(out.size()) < count; ++i) {
    Board b = GenerateSolution(rng.Split(i));
    if (seen.insert(b.tokens()).second) out.push_back(std::move(b));
  }
  return out;
}

int CellCount(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("cell ratio must lie in [0, 1]");
  }
  // The epsilon absorbs representation error in products such as 81 * 0.5.
  return static_cast<int>(std::floor(kCells * ratio + 0.5 + 1e-9));
}

std::string FormatBoard(const Board& b) {
  CheckLength(b);
  std::string s(kCells, '.');
  for (int i = 0; i < kCells; ++i) {
    if (b[i] != kMask) s[static_cast<std::size_t>(i)] = static_cast<char>('0' + b[i]);
  }
  return s;
}

Board ParseBoard(const std::string& line) {
  std::string s = line;
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  if (s.size() != kCells) {
    throw std::invalid_argument("board line must have 81 characters, got " +
                                std::to_string(s.size()));
  }
  std::vector<Token> cells(kCells);
  for (int i = 0; i < kCells; ++i) {
    const char ch = s[static_cast<std::size_t>(i)];
    if (ch == '.') {
      cells[static_cast<std::size_t>(i)] = kMask;
    } else if (ch >= '1' && ch <= '9') {
      cells[static_cast<std::size_t>(i)] = ch - '0';
    } else {
      throw std::invalid_argument(std::string("invalid board character '") +
                                  ch + "' at column " + std::to_string(i + 1));
    }
  }
  return Board(std::move(cells), Vocab());
}

void WriteBoards(const std::string& path, const std::vector<Board>& boards) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const Board& b : boards) out << FormatBoard(b) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Board> ReadBoards(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Board> boards;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      boards.push_back(ParseBoard(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
  return boards;
}

PositionSet SamplePositions(int n, int k, Rng& rng) {
  if (k < 0 || k > n) throw std::invalid_argument("cannot sample k of n");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.UniformInt(static_cast<std::uint32_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

NoisyBoard AddUniformNoise(const Board& solution, double noise_ratio, Rng rng) {
  CheckLength(solution);
  if (solution.ContainsMask()) {
    throw std::invalid_argument("noise is added to complete boards only");
  }
  NoisyBoard out{solution, SamplePositions(kCells, CellCount(noise_ratio), rng)};
  for (int i : out.noisy) {
    Token d = static_cast<Token>(1 + rng.UniformInt(8));
    if (d >= solution[i]) ++d;
    out.board.Set(i, d);
  }
  return out;
}

EditableSpec MakeEditableSpec(const PositionSet& noisy, double noise_ratio,
                              double editable_ratio, Rng rng) {
  EditableSpec spec;
  spec.noise_ratio = noise_ratio;
  spec.editable_ratio = editable_ratio;
  const int target = CellCount(editable_ratio);
  const int n_noisy = static_cast<int>(noisy.size());
  spec.clamped = target < n_noisy;
  std::vector<int> clean;
  for (int i = 0; i < kCells; ++i) {
    if (!Contains(noisy, i)) clean.push_back(i);
  }
  const int extra = std::max(0, target - n_noisy);
  const PositionSet pick =
      SamplePositions(static_cast<int>(clean.size()), extra, rng);
  spec.editable_set = noisy;
  for (int p : pick) spec.editable_set.push_back(clean[static_cast<std::size_t>(p)]);
  std::sort(spec.editable_set.begin(), spec.editable_set.end());
  return spec;
}

CellStats CellAccuracy(const std::vector<Board>& finals,
                       const std::vector<Board>& solutions) {
  if (finals.size() != solutions.size()) {
    throw std::invalid_argument("cell accuracy needs one solution per board");
  }
  CellStats stats;
  if (finals.empty()) return stats;
  long long correct = 0;
  long long masked = 0;
  long long cells = 0;
  for (std::size_t b = 0; b < finals.size(); ++b) {
    if (finals[b].size() != solutions[b].size()) {
      throw std::invalid_argument("cell accuracy length mismatch");
    }
    for (int i = 0; i < finals[b].size(); ++i) {
      correct += finals[b][i] == solutions[b][i] ? 1 : 0;
      masked += finals[b][i] == kMask ? 1 : 0;
    }
    cells += finals[b].size();
  }
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(cells);
  stats.mean_masked_cells =
      static_cast<double>(masked) / static_cast<double>(finals.size());
  return stats;
}

Board MaskCells(const Board& solution, double mask_ratio, Rng rng) {
  CheckLength(solution);
  Board out = solution;
  for (int i : SamplePositions(kCells, CellCount(mask_ratio), rng)) {
    out.Set(i, kMask);
  }
  return out;
}

}  // namespace cdlm::sudoku
