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

// Literal re-statement of the three decoding procedures over a lookup-table
// model, written without the library's refinement code, used as the oracle
// for trace conformance.

#ifndef CDLM_TESTS_SUPPORT_REFINEMENT_ORACLE_H_
#define CDLM_TESTS_SUPPORT_REFINEMENT_ORACLE_H_

#include <map>
#include <vector>

#include "cdlm/refinement.h"
#include "cdlm/rng.h"
#include "cdlm/sequence.h"

namespace cdlm::testing {

// Input sequence -> [position][symbol] probabilities.
using Table = std::map<std::vector<Token>, std::vector<std::vector<double>>>;

struct SimStep {
  std::vector<Token> input;
  std::vector<Token> predictions;
  std::vector<double> confidences;
  std::vector<int> remask;
  std::vector<Token> output;
};

std::vector<SimStep> SimulateThreshold(const Table& table, int vocab,
                                       Token mask, std::vector<Token> z,
                                       double tau, int steps);

std::vector<SimStep> SimulateEditable(const Table& table, int vocab,
                                      Token mask, std::vector<Token> z,
                                      const std::vector<int>& editable,
                                      double tau, int steps);

std::vector<SimStep> SimulateCompletion(const Table& table, int vocab,
                                        Token mask, std::vector<Token> z,
                                        int k0, int steps, bool frozen);

// Nearest integer to k0 * (T - t - 1) / T, halves rounded down, found by
// exhaustive search.
int ScheduleCount(int k0, int t, int steps);

// A distribution for every sequence of length `len` over `vocab` symbols.
// With `coarse`, probabilities are multiples of 1/8 so ties and exact
// threshold hits are frequent.
Table RandomTable(int len, int vocab, Rng& rng, bool coarse);

// True when the library trace matches the simulated one exactly.
bool SameTrace(const RefinementTrace& trace, const std::vector<SimStep>& sim,
               std::string* diff);

}  // namespace cdlm::testing

#endif  // CDLM_TESTS_SUPPORT_REFINEMENT_ORACLE_H_
