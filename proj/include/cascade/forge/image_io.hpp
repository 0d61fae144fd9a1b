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

#ifndef CASCADE_FORGE_IMAGE_IO_HPP_
#define CASCADE_FORGE_IMAGE_IO_HPP_

#include <filesystem>

#include "cascade/numcore/tensor.hpp"

namespace cascade::forge {

using numcore::Tensor;

// Reads an 8-bit RGB PNG or binary PPM (P6, maxval 255) into an [H,W,3]
// tensor with v/255 scaling. Throws IoError naming the path and the reason
// (missing file, bad signature, unsupported bit depth or color type).
Tensor load_image(const std::filesystem::path& path);

// Writes an [H,W,3] tensor as an 8-bit RGB PNG after round(255*v). Values
// are clamped to [0,1] first. Throws IoError on failure.
void save_png(const Tensor& frame, const std::filesystem::path& path);

// Creates `dir` and any missing parents. Throws IoError naming the path.
void ensure_directory(const std::filesystem::path& dir);

// Ensures the parent directory of `file` exists.
void ensure_parent(const std::filesystem::path& file);

// round(255*v)/255, clamped to [0,1]. The exact values save_png stores.
Tensor quantize(const Tensor& pixels);

}  // namespace cascade::forge

#endif  // CASCADE_FORGE_IMAGE_IO_HPP_
