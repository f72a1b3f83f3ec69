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
// Command-line front end: one subcommand per pipeline.

#ifndef CDLM_SRC_CLI_CLI_H_
#define CDLM_SRC_CLI_CLI_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

namespace cdlm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Usage errors raised after parsing (bad combinations, missing files).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// manifest.json in a run's output directory. Begin() records the resolved
// configuration with status "incomplete"; Complete() flips it once every
// output is written.
class RunManifest {
 public:
  RunManifest(std::string out_dir, std::string subcommand, nlohmann::json config);

  void Begin();
  void AddOutput(const std::string& name, const std::string& path);
  void Set(const std::string& key, nlohmann::json value);
  void Complete();
  void Fail(const std::string& error);

  const std::string& out_dir() const { return out_dir_; }
  std::string Path(const std::string& file) const;

 private:
  void Write() const;

  std::string out_dir_;
  nlohmann::json doc_;
};

std::string VersionStamp();

// Runs `body`, marking the manifest failed (and rethrowing) on any exception.
void RunRecorded(RunManifest& manifest, const std::function<void()>& body);

// Every subcommand registers itself with Register*. The returned callback
// runs after a successful parse.
using Runner = std::function<void()>;

Runner RegisterTrain(CLI::App& app);
Runner RegisterSudokuGen(CLI::App& app);
Runner RegisterEvalLocalize(CLI::App& app);
Runner RegisterEvalCorrect(CLI::App& app);
Runner RegisterEvalComplete(CLI::App& app);
Runner RegisterCrbGen(CLI::App& app);
Runner RegisterCrbEval(CLI::App& app);
Runner RegisterSelfRevise(CLI::App& app);
Runner RegisterGradCheck(CLI::App& app);
Runner RegisterReport(CLI::App& app);
Runner RegisterBridgeServe(CLI::App& app);

int Dispatch(int argc, char** argv);

}  // namespace cdlm::cli

#endif  // CDLM_SRC_CLI_CLI_H_
