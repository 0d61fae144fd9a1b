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

#ifndef CASCADE_HARNESS_GRAD_CHECK_HPP_
#define CASCADE_HARNESS_GRAD_CHECK_HPP_

#include <cstddef>
#include <cstdint>

namespace cascade::harness {

struct GradCheckOptions {
  std::uint64_t seed = 7;
  std::size_t instances = 5;
  std::size_t coords_per_instance = 40;
  double h = 1e-5;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t frames = 2;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
  std::size_t worst_instance = 0;
  std::size_t worst_index = 0;  // flat index into delta
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

// Compares the reverse-mode gradient of the full attack objective with
// central differences at randomly sampled delta coordinates. Each instance
// draws its own encoder, image sequence, starting delta and loss weights.
GradCheckResult grad_check(const GradCheckOptions& options);

}  // namespace cascade::harness

#endif  // CASCADE_HARNESS_GRAD_CHECK_HPP_
