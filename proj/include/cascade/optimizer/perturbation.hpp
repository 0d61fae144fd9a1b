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

#ifndef CASCADE_OPTIMIZER_PERTURBATION_HPP_
#define CASCADE_OPTIMIZER_PERTURBATION_HPP_

#include <cstddef>
#include <variant>
#include <vector>

#include "cascade/encoder/image_seq.hpp"
#include "cascade/numcore/rng.hpp"

namespace cascade::optimizer {

using numcore::Tensor;

struct PatchRegion {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  bool contains(std::size_t y, std::size_t x) const {
    return y >= top && y < top + height && x >= left && x < left + width;
  }
  friend bool operator==(const PatchRegion&, const PatchRegion&) = default;
};

// |delta| <= epsilon everywhere.
struct LInfBall {
  double epsilon = 0.1;
};

// delta confined to one rectangle per frame, no magnitude bound.
struct PatchMode {
  std::vector<PatchRegion> regions;
};

using ConstraintMode = std::variant<LInfBall, PatchMode>;

struct Perturbation {
  Tensor delta;  // shaped like the ImageSeq pixels
  ConstraintMode mode;
};

// Feasible point closest to `delta` (per element):
//   LInfBall: clamp to [max(-eps, -x), min(eps, 1-x)], i.e. the eps-clamp
//             followed by the pixel-validity clamp.
//   Patch:    zero outside the frame's region, clamp to [-x, 1-x] inside.
// Idempotent bit-for-bit. Throws ShapeError on mismatched shapes and
// ConfigError for a patch mode whose region count differs from the frame
// count or whose region leaves the frame.
Tensor project(const Tensor& delta, const encoder::ImageSeq& x, const ConstraintMode& mode);

// Largest violation of the constraint set: max(|delta| - eps, pixel range
// excursion) for LInfBall, and additionally any non-zero outside the
// region for Patch. Zero means feasible.
double constraint_violation(const Tensor& delta, const encoder::ImageSeq& x,
                            const ConstraintMode& mode);

// x + delta as an image sequence. Rounding residue of up to 1e-12 outside
// [0,1] is clamped away; anything larger throws DomainError.
encoder::ImageSeq apply_delta(const encoder::ImageSeq& x, const Tensor& delta);

enum class PatchSemantics {
  kSideLength,  // side = round(frac * min(H, W))
  kArea,        // side = round(sqrt(frac * H * W))
};

// Square region at a uniformly random valid offset. Throws ConfigError when
// frac is outside (0, 1] or the resulting side is 0 or exceeds min(H, W).
PatchRegion place_patch(std::size_t height, std::size_t width, double frac,
                        PatchSemantics semantics, numcore::Rng& rng);

}  // namespace cascade::optimizer

#endif  // CASCADE_OPTIMIZER_PERTURBATION_HPP_
