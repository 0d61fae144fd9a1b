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

#include "cascade/forge/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cascade/error.hpp"

namespace cascade::forge {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& reason) {
  throw IoError(path.string() + ": " + reason);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Tensor from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t h, std::size_t w) {
  std::vector<double> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) data[i] = bytes[i] / 255.0;
  return Tensor({h, w, 3}, std::move(data));
}

Tensor load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    fail(path, std::string("not a readable PNG (") + image.message + ")");
  }
  // Only plain 8-bit RGB is accepted: no alpha, palette, grayscale or
  // 16-bit samples.
  if (image.format != PNG_FORMAT_RGB) {
    const auto fmt = image.format;
    png_image_free(&image);
    fail(path, "unsupported PNG format (format flags " + std::to_string(fmt) +
                   "); expected 8-bit RGB");
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(path, "corrupt PNG data (" + msg + ")");
  }
  return from_bytes(pixels, image.height, image.width);
}

// Skips whitespace and '#' comments between PPM header fields.
std::size_t read_ppm_field(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) fail(path, "malformed PPM header");
  std::size_t v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + static_cast<std::size_t>(c - '0');
    c = in.get();
  }
  return v;
}

Tensor load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6') fail(path, "not a binary PPM (P6)");
  const auto w = read_ppm_field(in, path);
  const auto h = read_ppm_field(in, path);
  const auto maxval = read_ppm_field(in, path);
  if (maxval != 255) fail(path, "unsupported PPM maxval " + std::to_string(maxval));
  if (w == 0 || h == 0) fail(path, "empty PPM");
  std::vector<std::uint8_t> bytes(w * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) fail(path, "truncated PPM");
  return from_bytes(bytes, h, w);
}

}  // namespace

Tensor load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(path, "no such file");
  std::ifstream probe(path, std::ios::binary);
  char head[2] = {};
  probe.read(head, 2);
  if (head[0] == 'P' && head[1] == '6') return load_ppm(path);
  return load_png(path);
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void ensure_parent(const std::filesystem::path& file) {
  if (file.has_parent_path()) ensure_directory(file.parent_path());
}

void save_png(const Tensor& frame, const std::filesystem::path& path) {
  if (frame.rank() != 3 || frame.dim(2) != 3) {
    throw ShapeError("save_png: expected [H,W,3], got " + numcore::shape_string(frame.shape()));
  }
  const auto h = frame.dim(0), w = frame.dim(1);
  std::vector<std::uint8_t> bytes(frame.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(frame[i]);

  ensure_parent(path);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    fail(path, std::string("PNG write failed (") + image.message + ")");
  }
}

Tensor quantize(const Tensor& pixels) {
  Tensor out = pixels;
  for (auto& v : out.data()) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace cascade::forge
