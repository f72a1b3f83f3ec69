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
#include <iostream>

#include "cdlm/sudoku.h"
#include "cli/cli.h"

namespace cdlm::cli {

namespace {

// Seed streams for the two splits; evaluation boards never share a seed with
// training boards and are additionally deduplicated against them.
constexpr std::uint64_t kTrainSplit = 0;
constexpr std::uint64_t kEvalSplit = 1;

struct SudokuGenArgs {
  int count = 5000;
  std::uint64_t seed = 0;
  std::string split = "train";
  std::string exclude;
  std::string out = "runs/sudoku";
  std::string file;
};

}  // namespace

Runner RegisterSudokuGen(CLI::App& app) {
  auto args = std::make_shared<SudokuGenArgs>();
  CLI::App* sub =
      app.add_subcommand("sudoku-gen", "Generate distinct Sudoku solutions");
  sub->add_option("--count", args->count, "Number of boards")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", args->seed, "Run seed");
  sub->add_option("--split", args->split, "train | eval (disjoint seed ranges)")
      ->check(CLI::IsMember({"train", "eval"}));
  sub->add_option("--exclude", args->exclude,
                  "Board file whose boards must not be emitted")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args->out, "Output directory");
  sub->add_option("--file", args->file, "Board file name (default <split>.txt)");

  return [args, sub]() {
    if (!sub->parsed()) return;
    const SudokuGenArgs& a = *args;
    const std::string file = a.file.empty() ? a.split + ".txt" : a.file;
    RunManifest manifest(a.out, "sudoku-gen",
                         {{"count", a.count},
                          {"seed", a.seed},
                          {"split", a.split},
                          {"exclude", a.exclude},
                          {"file", file}});
    RunRecorded(manifest, [&] {
      std::vector<sudoku::Board> exclude;
      if (!a.exclude.empty()) exclude = sudoku::ReadBoards(a.exclude);
      const Rng rng =
          Rng(a.seed).Split(a.split == "train" ? kTrainSplit : kEvalSplit);
      const auto boards = sudoku::GenerateDistinct(a.count, rng, exclude);
      const std::string path = manifest.Path(file);
      sudoku::WriteBoards(path, boards);
      manifest.AddOutput("boards", path);
      manifest.Set("held_out_from", a.exclude);
      std::cerr << "wrote " << boards.size() << " boards to " << path << '\n';
    });
  };
}

}  // namespace cdlm::cli
