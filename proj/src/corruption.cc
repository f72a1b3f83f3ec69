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

#include "cdlm/corruption.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cdlm {

namespace {

constexpr int kMaxStage1Attempts = 100000;

void RequireProbability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " +
                                std::to_string(p));
  }
}

}  // namespace

double MaskRatioLaw::Sample(Rng& rng) const {
  return lo == hi ? lo : rng.Uniform(lo, hi);
}

void MixtureConfig::Validate() const {
  RequireProbability(alpha, "alpha");
  RequireProbability(alpha_max, "alpha_max");
  RequireProbability(mask_ratio_law.lo, "mask ratio lower bound");
  RequireProbability(mask_ratio_law.hi, "mask ratio upper bound");
  if (mask_ratio_law.lo > mask_ratio_law.hi) {
    throw std::invalid_argument("mask ratio law has lo > hi");
  }
  if (!(lambda_noise >= 0.0)) {
    throw std::invalid_argument("lambda_noise must be nonnegative");
  }
}

void CorruptionOutcome::CheckInvariants(const TokenSequence& clean) const {
  auto fail = [](const std::string& msg) {
    throw std::logic_error("corruption invariant violated: " + msg);
  };
  if (clean.size() != corrupted.size()) fail("length changed");
  if (!IsSortedUnique(masked_set) || !IsSortedUnique(replaced_set)) {
    fail("position sets not sorted/unique");
  }
  const Token mask = corrupted.vocab().mask_id();
  std::size_t mi = 0;
  std::size_t ni = 0;
  for (int i = 0; i < clean.size(); ++i) {
    const bool in_m = mi < masked_set.size() && masked_set[mi] == i;
    const bool in_n = ni < replaced_set.size() && replaced_set[ni] == i;
    if (in_m && in_n) fail("M and N intersect at " + std::to_string(i));
    if (in_m) {
      ++mi;
      if (corrupted[i] != mask) fail("masked position without mask");
      auto it = originals.find(i);
      if (it == originals.end() || it->second != clean[i]) {
        fail("missing original for masked position");
      }
    } else if (in_n) {
      ++ni;
      auto it = originals.find(i);
      if (it == originals.end() || it->second != clean[i]) {
        fail("missing original for replaced position");
      }
      if (corrupted[i] == mask || corrupted[i] == clean[i]) {
        fail("replaced position " + std::to_string(i) +
             " carries mask or original");
      }
    } else if (corrupted[i] != clean[i]) {
      fail("untouched position " + std::to_string(i) + " changed");
    }
  }
  if (mi != masked_set.size() || ni != replaced_set.size()) {
    fail("position out of range");
  }
  if (originals.size() != masked_set.size() + replaced_set.size()) {
    fail("originals cover positions outside M and N");
  }
}

CorruptionOutcome AbsorbCorrupt(const TokenSequence& x, double lambda, Rng rng) {
  RequireProbability(lambda, "mask ratio");
  if (x.ContainsMask()) {
    throw std::invalid_argument(
        "clean sequence already contains the mask symbol");
  }
  CorruptionOutcome out{x, {}, {}, lambda, {}};
  const Token mask = x.vocab().mask_id();
  for (int i = 0; i < x.size(); ++i) {
    if (rng.Uniform() < lambda) {
      out.corrupted.Set(i, mask);
      out.masked_set.push_back(i);
      out.originals.emplace(i, x[i]);
    }
  }
  return out;
}

CorruptionOutcome UniformReplace(const CorruptionOutcome& partial, double alpha,
                                 Rng rng) {
  RequireProbability(alpha, "alpha");
  const Vocabulary& vocab = partial.corrupted.vocab();
  if (vocab.size() < 3) {
    throw std::invalid_argument(
        "uniform replacement needs a vocabulary of at least 3 symbols");
  }
  if (!partial.replaced_set.empty()) {
    throw std::invalid_argument("uniform replacement applied twice");
  }
  CorruptionOutcome out = partial;
  const Token mask = vocab.mask_id();
  const auto domain = static_cast<std::uint32_t>(vocab.size() - 2);
  for (int i = 0; i < out.corrupted.size(); ++i) {
    const Token original = out.corrupted[i];
    if (original == mask) continue;
    if (!(rng.Uniform() < alpha)) continue;
    // k-th symbol of V with {mask, original} removed, in index order.
    Token pick = static_cast<Token>(rng.UniformInt(domain));
    const Token lo = std::min(mask, original);
    const Token hi = std::max(mask, original);
    if (pick >= lo) ++pick;
    if (pick >= hi) ++pick;
    out.corrupted.Set(i, pick);
    out.replaced_set.push_back(i);
    out.originals.emplace(i, original);
  }
  return out;
}

CorruptionOutcome AbsorbWithSampledRatio(const TokenSequence& x,
                                         const MaskRatioLaw& law,
                                         const Rng& rng) {
  Rng ratio_rng = rng.Split(kRatioStream);
  const Rng mask_rng = rng.Split(kMaskStream);
  for (int attempt = 0; attempt < kMaxStage1Attempts; ++attempt) {
    const double ratio = law.Sample(ratio_rng);
    CorruptionOutcome out =
        AbsorbCorrupt(x, ratio, mask_rng.Split(static_cast<std::uint64_t>(attempt)));
    if (!out.masked_set.empty()) return out;
  }
  throw std::invalid_argument(
      "mask ratio law never produced a masked position");
}

CorruptionOutcome MixtureCorrupt(const TokenSequence& x, const MixtureConfig& cfg,
                                 const Rng& rng) {
  cfg.Validate();
  CorruptionOutcome out = AbsorbWithSampledRatio(x, cfg.mask_ratio_law, rng);
  double alpha = cfg.alpha;
  if (cfg.sample_alpha) {
    Rng alpha_rng = rng.Split(kAlphaStream);
    alpha = alpha_rng.Uniform(0.0, cfg.alpha_max);
  }
  if (alpha > 0.0) out = UniformReplace(out, alpha, rng.Split(kReplaceStream));
  return out;
}

}  // namespace cdlm
