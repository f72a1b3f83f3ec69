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

#ifndef CDLM_RNG_H_
#define CDLM_RNG_H_

#include <array>
#include <cstdint>

namespace cdlm {

// Counter-based, splittable random source built on Philox4x32-10.
//
// A stream is identified by a 64-bit key; draws walk a 128-bit counter.
// Split(id) derives an independent child stream from (key, id) alone, so a
// child's draws never depend on how many values the parent has consumed.
// All conversions to floating point and bounded integers are implemented
// here (not via <random> distributions) so output is identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng Split(std::uint64_t stream_id) const;

  std::uint32_t NextU32();
  std::uint64_t NextU64();

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on [lo, hi).
  double Uniform(double lo, double hi);
  // Uniform integer on [0, n); n must be positive. Unbiased.
  std::uint32_t UniformInt(std::uint32_t n);
  bool Bernoulli(double p);
  // Standard normal via Box-Muller.
  double Normal();

  std::uint64_t key() const { return key_; }

 private:
  Rng(std::uint64_t key, bool /*raw*/) : key_(key) {}
  void Refill();

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> Philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

}  // namespace cdlm

#endif  // CDLM_RNG_H_
