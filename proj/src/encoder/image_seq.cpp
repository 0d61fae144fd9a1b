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

#include "cascade/encoder/image_seq.hpp"

#include <algorithm>
#include <string>

#include "cascade/error.hpp"

namespace cascade::encoder {

using numcore::Tensor;

ImageSeq::ImageSeq(Tensor pixels) : pixels_(std::move(pixels)) {
  const auto& s = pixels_.shape();
  if (s.size() != 4 || s[3] != kChannels) {
    throw ShapeError("image_seq: expected [n,H,W,3], got " + numcore::shape_string(s));
  }
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    const double v = pixels_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("image_seq: pixel " + std::to_string(v) + " at flat index " +
                        std::to_string(i) + " outside [0,1]");
    }
  }
}

ImageSeq ImageSeq::from_frames(const std::vector<Tensor>& frames) {
  if (frames.empty()) throw ShapeError("image_seq: no frames");
  const auto& first = frames.front().shape();
  if (first.size() != 3) {
    throw ShapeError("image_seq: frame must be [H,W,3], got " + numcore::shape_string(first));
  }
  std::vector<double> data;
  data.reserve(frames.size() * frames.front().size());
  for (const auto& f : frames) {
    if (f.shape() != first) {
      throw ShapeError("image_seq: frame shape " + numcore::shape_string(f.shape()) +
                       " differs from " + numcore::shape_string(first));
    }
    data.insert(data.end(), f.data().begin(), f.data().end());
  }
  return ImageSeq(Tensor({frames.size(), first[0], first[1], first[2]}, std::move(data)));
}

Tensor ImageSeq::frame(std::size_t i) const {
  if (i >= frames()) throw ShapeError("image_seq: frame index out of range");
  const auto n = pixels_per_frame();
  std::vector<double> data(pixels_.data().begin() + static_cast<std::ptrdiff_t>(i * n),
                           pixels_.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
  return Tensor::unchecked({height(), width(), kChannels}, std::move(data));
}

}  // namespace cascade::encoder
