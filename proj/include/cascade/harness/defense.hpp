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

#ifndef CASCADE_HARNESS_DEFENSE_HPP_
#define CASCADE_HARNESS_DEFENSE_HPP_

#include <string>
#include <variant>

#include "cascade/encoder/image_seq.hpp"

namespace cascade::harness {

using numcore::Tensor;

struct NoDefense {};
struct BitRed {
  int bits = 3;  // 1..7
};
struct MedianSmooth {
  int window = 3;  // odd, >= 3
};
using DefenseSpec = std::variant<NoDefense, BitRed, MedianSmooth>;

// v -> floor(v * L + 0.5) / L with L = 2^bits - 1 (round half up).
// Throws ConfigError unless 1 <= bits <= 7.
Tensor bit_depth_reduce(const Tensor& frame, int bits);

// Per-channel window median with edge-replicate padding on an [H,W,3]
// frame. Throws ConfigError unless window is odd and >= 3.
Tensor median_smooth(const Tensor& frame, int window);

// Throws ConfigError for out-of-range parameters.
void validate(const DefenseSpec& spec);
// Applies the defense frame by frame.
encoder::ImageSeq apply_defense(const encoder::ImageSeq& x, const DefenseSpec& spec);

// "none", "bitred:<bits>", "median:<window>".
std::string to_string(const DefenseSpec& spec);
DefenseSpec defense_from_string(const std::string& s);

}  // namespace cascade::harness

#endif  // CASCADE_HARNESS_DEFENSE_HPP_
