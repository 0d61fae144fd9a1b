/* Copyright 2026 The Cascade Attack Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CASCADE_NUMCORE_RNG_HPP_
#define CASCADE_NUMCORE_RNG_HPP_

#include <cstdint>
#include <string_view>

#include "cascade/numcore/tensor.hpp"

namespace cascade::numcore {

// SplitMix64. The algorithm name is written into every report and manifest
// so a run can be replayed bit-for-bit on another machine.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64";

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

  // Independent child stream, e.g. one per record of a batch.
  Rng split(std::uint64_t index) const;

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stateless mix of a seed with an index; used to derive per-record seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// Gaussian tensor with standard deviation `scale` (callers pass
// 1/sqrt(fan_in) for weight matrices). Throws ConfigError if scale <= 0.
Tensor gaussian_init(Rng& rng, Shape shape, double scale);

}  // namespace cascade::numcore

#endif  // CASCADE_NUMCORE_RNG_HPP_
