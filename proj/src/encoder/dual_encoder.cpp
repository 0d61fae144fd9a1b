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

#include "cascade/encoder/dual_encoder.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>

#include "cascade/error.hpp"
#include "cascade/numcore/ops.hpp"
#include "cascade/numcore/rng.hpp"

namespace cascade::encoder {

namespace nc = numcore;
using nc::Tensor;
using nc::Var;

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'D', 'E', 'W'};
constexpr std::uint32_t kVersion = 1;
constexpr double kBiasScale = 0.1;

Tensor flatten(const Tensor& row) { return Tensor::unchecked({row.size()}, row.storage()); }

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw IoError("encoder blob: truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

void put_tensor(std::ostream& out, const Tensor& t) {
  for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

Tensor get_tensor(std::istream& in, nc::Shape shape) {
  std::vector<double> data(nc::shape_size(shape));
  for (auto& v : data) v = std::bit_cast<double>(get_le(in, 8));
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

DualEncoder DualEncoder::initialize(std::uint64_t seed, EncoderDims dims) {
  if (dims.patch_size == 0 || dims.hidden == 0 || dims.embed == 0) {
    throw ConfigError("encoder: dimensions must be positive");
  }
  nc::Rng rng(seed);
  const auto patch_dim = kChannels * dims.patch_size * dims.patch_size;
  const double hidden_scale = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  EncoderWeights w;
  w.patch_proj = nc::gaussian_init(rng, {patch_dim, dims.hidden},
                                   1.0 / std::sqrt(static_cast<double>(patch_dim)));
  w.patch_bias = nc::gaussian_init(rng, {1, dims.hidden}, kBiasScale);
  w.image_out = nc::gaussian_init(rng, {dims.hidden, dims.embed}, hidden_scale);
  w.image_bias = nc::gaussian_init(rng, {1, dims.embed}, kBiasScale);
  w.token_table = nc::gaussian_init(rng, {kVocabSize, dims.hidden}, 1.0);
  w.text_out = nc::gaussian_init(rng, {dims.hidden, dims.embed}, hidden_scale);
  w.text_bias = nc::gaussian_init(rng, {1, dims.embed}, kBiasScale);
  return DualEncoder(seed, dims, std::move(w));
}

Var DualEncoder::encode_frames(Var images) const {
  auto& tape = images.tape();
  const auto& s = images.shape();
  if (s.size() != 4 || s[3] != kChannels) {
    throw ShapeError("encode_frames: expected [n,H,W,3], got " + nc::shape_string(s));
  }
  if (s[1] % dims_.patch_size != 0 || s[2] % dims_.patch_size != 0) {
    throw ShapeError("encode_frames: frame " + std::to_string(s[1]) + "x" +
                     std::to_string(s[2]) + " not divisible by patch size " +
                     std::to_string(dims_.patch_size));
  }
  const auto patches_per_frame = (s[1] / dims_.patch_size) * (s[2] / dims_.patch_size);
  auto normalized = nc::scale(nc::add_scalar(images, -kPixelMean), 1.0 / kPixelStd);
  auto patches = nc::extract_patches(normalized, dims_.patch_size);
  auto hidden = nc::tanh(nc::add_row(nc::matmul(patches, tape.constant(weights_.patch_proj)),
                                     tape.constant(weights_.patch_bias)));
  auto pooled = nc::mean_row_groups(hidden, patches_per_frame);
  auto z = nc::add_row(nc::matmul(pooled, tape.constant(weights_.image_out)),
                       tape.constant(weights_.image_bias));
  return nc::normalize_rows(z);
}

Var DualEncoder::encode_text(nc::Tape& tape, const TextTokens& tokens) const {
  if (tokens.ids.empty()) throw ShapeError("encode_text: empty token list");
  // The table is constant, so gather from a value copy of the needed rows
  // only instead of putting the whole table on the tape.
  const auto hidden = dims_.hidden;
  std::vector<double> rows(tokens.ids.size() * hidden);
  for (std::size_t i = 0; i < tokens.ids.size(); ++i) {
    const auto id = tokens.ids[i];
    if (id >= kVocabSize) throw ShapeError("encode_text: token id out of range");
    for (std::size_t c = 0; c < hidden; ++c) {
      rows[i * hidden + c] = weights_.token_table.at(id, c);
    }
  }
  auto embedded = tape.constant(Tensor::unchecked({tokens.ids.size(), hidden}, std::move(rows)));
  auto pooled = nc::tanh(nc::mean_row_groups(embedded, tokens.ids.size()));
  auto z = nc::add_row(nc::matmul(pooled, tape.constant(weights_.text_out)),
                       tape.constant(weights_.text_bias));
  return nc::normalize_rows(z);
}

Tensor DualEncoder::encode_text(const TextTokens& tokens) const {
  nc::Tape tape;
  return flatten(encode_text(tape, tokens).value());
}

Tensor DualEncoder::encode_frame(const Tensor& frame) const {
  const auto& s = frame.shape();
  if (s.size() != 3) throw ShapeError("encode_frame: expected [H,W,3], got " + nc::shape_string(s));
  nc::Tape tape;
  auto images = tape.constant(Tensor::unchecked({1, s[0], s[1], s[2]}, frame.storage()));
  return flatten(encode_frames(images).value());
}

Tensor DualEncoder::encode_sequence(const ImageSeq& x) const {
  nc::Tape tape;
  auto frames = encode_frames(tape.constant(x.pixels()));
  return flatten(sequence_embedding(frames).value());
}

Tensor DualEncoder::frame_embeddings(const ImageSeq& x) const {
  nc::Tape tape;
  return encode_frames(tape.constant(x.pixels())).value();
}

void DualEncoder::save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(dims_.patch_size));
  put_u32(out, static_cast<std::uint32_t>(dims_.hidden));
  put_u32(out, static_cast<std::uint32_t>(dims_.embed));
  put_u32(out, static_cast<std::uint32_t>(kVocabSize));
  put_u64(out, seed_);
  for (const Tensor* t : {&weights_.patch_proj, &weights_.patch_bias, &weights_.image_out,
                          &weights_.image_bias, &weights_.token_table, &weights_.text_out,
                          &weights_.text_bias}) {
    put_tensor(out, *t);
  }
  if (!out) throw IoError("encoder blob: write failed");
}

DualEncoder DualEncoder::load(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("encoder blob: bad magic");
  const auto version = get_le(in, 4);
  if (version != kVersion) {
    throw IoError("encoder blob: unsupported version " + std::to_string(version));
  }
  EncoderDims dims;
  dims.patch_size = get_le(in, 4);
  dims.hidden = get_le(in, 4);
  dims.embed = get_le(in, 4);
  if (get_le(in, 4) != kVocabSize) throw IoError("encoder blob: vocabulary size mismatch");
  const auto seed = get_le(in, 8);
  const auto patch_dim = kChannels * dims.patch_size * dims.patch_size;
  EncoderWeights w;
  w.patch_proj = get_tensor(in, {patch_dim, dims.hidden});
  w.patch_bias = get_tensor(in, {1, dims.hidden});
  w.image_out = get_tensor(in, {dims.hidden, dims.embed});
  w.image_bias = get_tensor(in, {1, dims.embed});
  w.token_table = get_tensor(in, {kVocabSize, dims.hidden});
  w.text_out = get_tensor(in, {dims.hidden, dims.embed});
  w.text_bias = get_tensor(in, {1, dims.embed});
  return DualEncoder(seed, dims, std::move(w));
}

Var sequence_embedding(Var frame_embeddings) {
  const auto n = frame_embeddings.shape().at(0);
  return nc::normalize_rows(nc::mean_row_groups(frame_embeddings, n));
}

DualEncoder make_victim(std::uint64_t seed, std::uint64_t surrogate_seed, EncoderDims dims) {
  if (seed == surrogate_seed) {
    throw ConfigError("make_victim: victim seed " + std::to_string(seed) +
                      " equals surrogate seed; the victim must be held out");
  }
  return DualEncoder::initialize(seed, dims);
}

}  // namespace cascade::encoder
