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

#include "cascade/optimizer/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/error.hpp"

namespace cascade::optimizer {

namespace {

void check_shapes(const Tensor& delta, const encoder::ImageSeq& x) {
  if (delta.shape() != x.pixels().shape()) {
    throw ShapeError("project: delta " + numcore::shape_string(delta.shape()) + " vs images " +
                     numcore::shape_string(x.pixels().shape()));
  }
}

void check_regions(const PatchMode& patch, const encoder::ImageSeq& x) {
  if (patch.regions.size() != x.frames()) {
    throw ConfigError("patch mode: " + std::to_string(patch.regions.size()) +
                      " regions for " + std::to_string(x.frames()) + " frames");
  }
  for (const auto& r : patch.regions) {
    if (r.height == 0 || r.width == 0 || r.top + r.height > x.height() ||
        r.left + r.width > x.width()) {
      throw ConfigError("patch mode: region leaves the frame");
    }
  }
}

// Calls fn(flat_index, inside_region) for every element.
template <class Fn>
void visit_patch(const encoder::ImageSeq& x, const PatchMode& patch, Fn fn) {
  std::size_t i = 0;
  for (std::size_t f = 0; f < x.frames(); ++f) {
    const auto& region = patch.regions[f];
    for (std::size_t y = 0; y < x.height(); ++y) {
      for (std::size_t col = 0; col < x.width(); ++col) {
        const bool inside = region.contains(y, col);
        for (std::size_t c = 0; c < encoder::kChannels; ++c, ++i) fn(i, inside);
      }
    }
  }
}

}  // namespace

Tensor project(const Tensor& delta, const encoder::ImageSeq& x, const ConstraintMode& mode) {
  check_shapes(delta, x);
  const auto& px = x.pixels();
  Tensor out = delta;
  if (const auto* ball = std::get_if<LInfBall>(&mode)) {
    const double eps = ball->epsilon;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double lo = std::max(-eps, -px[i]);
      const double hi = std::min(eps, 1.0 - px[i]);
      out[i] = std::clamp(out[i], lo, hi);
    }
    return out;
  }
  const auto& patch = std::get<PatchMode>(mode);
  check_regions(patch, x);
  visit_patch(x, patch, [&](std::size_t i, bool inside) {
    out[i] = inside ? std::clamp(out[i], -px[i], 1.0 - px[i]) : 0.0;
  });
  return out;
}

double constraint_violation(const Tensor& delta, const encoder::ImageSeq& x,
                            const ConstraintMode& mode) {
  check_shapes(delta, x);
  const auto& px = x.pixels();
  double worst = 0.0;
  auto range_excursion = [&](std::size_t i) {
    const double v = px[i] + delta[i];
    return std::max({0.0, -v, v - 1.0});
  };
  if (const auto* ball = std::get_if<LInfBall>(&mode)) {
    for (std::size_t i = 0; i < delta.size(); ++i) {
      worst = std::max({worst, std::abs(delta[i]) - ball->epsilon, range_excursion(i)});
    }
    return worst;
  }
  const auto& patch = std::get<PatchMode>(mode);
  check_regions(patch, x);
  visit_patch(x, patch, [&](std::size_t i, bool inside) {
    worst = std::max(worst, inside ? range_excursion(i) : std::abs(delta[i]));
  });
  return worst;
}

encoder::ImageSeq apply_delta(const encoder::ImageSeq& x, const Tensor& delta) {
  check_shapes(delta, x);
  constexpr double kSlack = 1e-12;
  Tensor out = x.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = out[i] + delta[i];
    if (v < -kSlack || v > 1.0 + kSlack) {
      throw DomainError("apply_delta: pixel " + std::to_string(v) + " at flat index " +
                        std::to_string(i) + " outside [0,1]");
    }
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return encoder::ImageSeq(std::move(out));
}

PatchRegion place_patch(std::size_t height, std::size_t width, double frac,
                        PatchSemantics semantics, numcore::Rng& rng) {
  if (!(frac > 0.0 && frac <= 1.0)) {
    throw ConfigError("place_patch: fraction must be in (0, 1], got " + std::to_string(frac));
  }
  const auto min_side = std::min(height, width);
  const double raw = semantics == PatchSemantics::kSideLength
                         ? frac * static_cast<double>(min_side)
                         : std::sqrt(frac * static_cast<double>(height * width));
  const auto side = static_cast<std::size_t>(std::llround(raw));
  if (side == 0) throw ConfigError("place_patch: fraction too small for the frame");
  if (side > min_side) {
    throw ConfigError("place_patch: fraction too large; side " + std::to_string(side) +
                      " exceeds frame " + std::to_string(height) + "x" + std::to_string(width));
  }
  PatchRegion r;
  r.height = r.width = side;
  r.top = static_cast<std::size_t>(rng.below(height - side + 1));
  r.left = static_cast<std::size_t>(rng.below(width - side + 1));
  return r;
}

}  // namespace cascade::optimizer
