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

#ifndef CASCADE_ENCODER_IMAGE_SEQ_HPP_
#define CASCADE_ENCODER_IMAGE_SEQ_HPP_

#include <cstddef>

#include "cascade/numcore/tensor.hpp"

namespace cascade::encoder {

inline constexpr std::size_t kChannels = 3;

// n RGB frames of equal size, stored as one [n,H,W,3] tensor with every
// pixel in [0,1].
class ImageSeq {
 public:
  ImageSeq() = default;
  // Throws ShapeError for a tensor that is not [n,H,W,3] and DomainError
  // for a pixel outside [0,1].
  explicit ImageSeq(numcore::Tensor pixels);

  // Stacks [H,W,3] frames; all must share H and W.
  static ImageSeq from_frames(const std::vector<numcore::Tensor>& frames);

  std::size_t frames() const { return pixels_.dim(0); }
  std::size_t height() const { return pixels_.dim(1); }
  std::size_t width() const { return pixels_.dim(2); }
  std::size_t pixels_per_frame() const { return height() * width() * kChannels; }

  const numcore::Tensor& pixels() const { return pixels_; }
  numcore::Tensor frame(std::size_t i) const;

 private:
  numcore::Tensor pixels_;
};

}  // namespace cascade::encoder

#endif  // CASCADE_ENCODER_IMAGE_SEQ_HPP_
