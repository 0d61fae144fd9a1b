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

#ifndef CASCADE_ENCODER_DUAL_ENCODER_HPP_
#define CASCADE_ENCODER_DUAL_ENCODER_HPP_

#include <cstdint>
#include <iosfwd>

#include "cascade/encoder/image_seq.hpp"
#include "cascade/encoder/tokenizer.hpp"
#include "cascade/numcore/tape.hpp"

namespace cascade::encoder {

struct EncoderDims {
  std::size_t patch_size = 8;
  std::size_t hidden = 64;
  std::size_t embed = 32;

  friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

struct EncoderWeights {
  numcore::Tensor patch_proj;   // [3*p*p, hidden]
  numcore::Tensor patch_bias;   // [1, hidden]
  numcore::Tensor image_out;    // [hidden, embed]
  numcore::Tensor image_bias;   // [1, embed]
  numcore::Tensor token_table;  // [kVocabSize, hidden]
  numcore::Tensor text_out;     // [hidden, embed]
  numcore::Tensor text_bias;    // [1, embed]

  friend bool operator==(const EncoderWeights&, const EncoderWeights&) = default;
};

// Toy modality-aligned model: a patch-MLP image branch and a
// bag-of-buckets text branch, both ending in an L2-normalized embedding of
// the same width. Immutable once built.
//
// Image branch: (x - kPixelMean) / kPixelStd -> non-overlapping patches ->
// linear -> tanh -> mean over patches -> linear -> normalize.
// Text branch: bucket embeddings -> mean -> tanh -> linear -> normalize.
class DualEncoder {
 public:
  static constexpr double kPixelMean = 0.5;
  static constexpr double kPixelStd = 0.25;

  static DualEncoder initialize(std::uint64_t seed, EncoderDims dims = {});

  std::uint64_t seed() const { return seed_; }
  const EncoderDims& dims() const { return dims_; }
  const EncoderWeights& weights() const { return weights_; }

  // images: [n,H,W,3] on `tape`. Returns [n, embed] with unit rows.
  // Throws ShapeError if H or W is not divisible by the patch size.
  numcore::Var encode_frames(numcore::Var images) const;
  // Returns [1, embed] on `tape`. Throws ShapeError on empty tokens.
  numcore::Var encode_text(numcore::Tape& tape, const TextTokens& tokens) const;

  // Value-level helpers. Embeddings are returned as [embed] vectors.
  numcore::Tensor encode_text(const TextTokens& tokens) const;
  numcore::Tensor encode_frame(const numcore::Tensor& frame) const;  // frame: [H,W,3]
  numcore::Tensor encode_sequence(const ImageSeq& x) const;
  numcore::Tensor frame_embeddings(const ImageSeq& x) const;  // [n, embed]

  // Versioned little-endian blob: magic, version, dims, vocab, seed, then
  // every weight tensor in EncoderWeights order.
  void save(std::ostream& out) const;
  static DualEncoder load(std::istream& in);

  friend bool operator==(const DualEncoder&, const DualEncoder&) = default;

 private:
  DualEncoder(std::uint64_t seed, EncoderDims dims, EncoderWeights weights)
      : seed_(seed), dims_(dims), weights_(std::move(weights)) {}

  std::uint64_t seed_ = 0;
  EncoderDims dims_;
  EncoderWeights weights_;
};

// Renormalized mean of frame embeddings: [n, embed] -> [1, embed].
numcore::Var sequence_embedding(numcore::Var frame_embeddings);

// Held-out encoder for transfer evaluation. Throws ConfigError when `seed`
// equals the surrogate's seed.
DualEncoder make_victim(std::uint64_t seed, std::uint64_t surrogate_seed, EncoderDims dims = {});

}  // namespace cascade::encoder

#endif  // CASCADE_ENCODER_DUAL_ENCODER_HPP_
