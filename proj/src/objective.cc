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

#include "cdlm/objective.h"

namespace cdlm {

LossBreakdown AverageBreakdowns(std::span<const LossBreakdown> items) {
  LossBreakdown out;
  if (items.empty()) return out;
  for (const LossBreakdown& b : items) {
    out.masked_term += b.masked_term;
    out.noise_term += b.noise_term;
    out.total += b.total;
    out.masked_count += b.masked_count;
    out.noise_count += b.noise_count;
  }
  const double n = static_cast<double>(items.size());
  out.masked_term /= n;
  out.noise_term /= n;
  out.total /= n;
  return out;
}

}  // namespace cdlm
