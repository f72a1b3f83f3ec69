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

#include "cdlm/simd/kernels.h"
#include "cli/cli.h"

namespace cdlm::cli {

int Dispatch(int argc, char** argv) {
  CLI::App app{"Corrective masked diffusion workbench"};
  app.set_version_flag("--version", VersionStamp());
  app.set_config("--config", "", "Key-value config file; flags override it");
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "Kernel ISA: scalar | avx2 | avx512")
      ->check(CLI::IsMember({"scalar", "avx2", "avx512"}));

  std::vector<Runner> runners;
  runners.push_back(RegisterTrain(app));
  runners.push_back(RegisterSudokuGen(app));
  runners.push_back(RegisterEvalLocalize(app));
  runners.push_back(RegisterEvalCorrect(app));
  runners.push_back(RegisterEvalComplete(app));
  runners.push_back(RegisterCrbGen(app));
  runners.push_back(RegisterCrbEval(app));
  runners.push_back(RegisterSelfRevise(app));
  runners.push_back(RegisterGradCheck(app));
  runners.push_back(RegisterReport(app));
  runners.push_back(RegisterBridgeServe(app));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (!isa.empty()) simd::ForceIsa(simd::ParseIsa(isa));
    for (const Runner& r : runners) r();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace cdlm::cli
