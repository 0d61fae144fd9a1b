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

#include "cascade/harness/defense.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cascade/error.hpp"

namespace cascade::harness {

namespace {

void check_frame(const Tensor& frame, const char* op) {
  if (frame.rank() != 3 || frame.dim(2) != encoder::kChannels) {
    throw ShapeError(std::string(op) + ": expected [H,W,3], got " +
                     numcore::shape_string(frame.shape()));
  }
}

void check_bits(int bits) {
  if (bits < 1 || bits > 7) {
    throw ConfigError("bit_depth_reduce: bits must be in [1,7], got " + std::to_string(bits));
  }
}

void check_window(int window) {
  if (window < 3 || window % 2 == 0) {
    throw ConfigError("median_smooth: window must be odd and >= 3, got " +
                      std::to_string(window));
  }
}

}  // namespace

Tensor bit_depth_reduce(const Tensor& frame, int bits) {
  check_frame(frame, "bit_depth_reduce");
  check_bits(bits);
  const double levels = static_cast<double>((1 << bits) - 1);
  Tensor out = frame;
  for (auto& v : out.data()) v = std::floor(v * levels + 0.5) / levels;
  return out;
}

Tensor median_smooth(const Tensor& frame, int window) {
  check_frame(frame, "median_smooth");
  check_window(window);
  const long h = static_cast<long>(frame.dim(0));
  const long w = static_cast<long>(frame.dim(1));
  const long r = window / 2;
  const auto c = static_cast<long>(encoder::kChannels);
  Tensor out = frame;
  std::vector<double> buf(static_cast<std::size_t>(window * window));
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (long ch = 0; ch < c; ++ch) {
        std::size_t k = 0;
        for (long dy = -r; dy <= r; ++dy) {
          const long yy = std::clamp(y + dy, 0L, h - 1);
          for (long dx = -r; dx <= r; ++dx) {
            const long xx = std::clamp(x + dx, 0L, w - 1);
            buf[k++] = frame[static_cast<std::size_t>((yy * w + xx) * c + ch)];
          }
        }
        std::nth_element(buf.begin(), mid, buf.end());
        out[static_cast<std::size_t>((y * w + x) * c + ch)] = *mid;
      }
    }
  }
  return out;
}

void validate(const DefenseSpec& spec) {
  if (const auto* b = std::get_if<BitRed>(&spec)) check_bits(b->bits);
  if (const auto* m = std::get_if<MedianSmooth>(&spec)) check_window(m->window);
}

encoder::ImageSeq apply_defense(const encoder::ImageSeq& x, const DefenseSpec& spec) {
  validate(spec);
  if (std::holds_alternative<NoDefense>(spec)) return x;
  std::vector<Tensor> frames;
  frames.reserve(x.frames());
  for (std::size_t f = 0; f < x.frames(); ++f) {
    const Tensor frame = x.frame(f);
    if (const auto* b = std::get_if<BitRed>(&spec)) {
      frames.push_back(bit_depth_reduce(frame, b->bits));
    } else {
      frames.push_back(median_smooth(frame, std::get<MedianSmooth>(spec).window));
    }
  }
  return encoder::ImageSeq::from_frames(frames);
}

std::string to_string(const DefenseSpec& spec) {
  if (const auto* b = std::get_if<BitRed>(&spec)) return "bitred:" + std::to_string(b->bits);
  if (const auto* m = std::get_if<MedianSmooth>(&spec)) {
    return "median:" + std::to_string(m->window);
  }
  return "none";
}

DefenseSpec defense_from_string(const std::string& s) {
  if (s == "none") return NoDefense{};
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  if (colon == std::string::npos || (kind != "bitred" && kind != "median")) {
    throw ConfigError("defense: expected none, bitred:<bits> or median:<window>, got '" + s + "'");
  }
  int value = 0;
  try {
    std::size_t used = 0;
    value = std::stoi(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw ConfigError("defense: bad parameter in '" + s + "'");
  }
  DefenseSpec spec = kind == "bitred" ? DefenseSpec(BitRed{value}) : DefenseSpec(MedianSmooth{value});
  validate(spec);
  return spec;
}

}  // namespace cascade::harness
