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

#ifndef CASCADE_OBJECTIVES_OBJECTIVES_HPP_
#define CASCADE_OBJECTIVES_OBJECTIVES_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cascade/deception/chain.hpp"
#include "cascade/encoder/dual_encoder.hpp"
#include "cascade/numcore/tape.hpp"

namespace cascade::objectives {

using numcore::Tensor;
using numcore::Var;

// Ordered scene descriptors the matching head scores an image against.
struct DescriptorSet {
  std::string group_id;
  std::vector<std::string> descriptors;

  // Throws ConfigError for fewer than two or repeated descriptors.
  void validate() const;
};

// {"A safe driving scenario", "An unsafe driving scenario"}.
DescriptorSet safety_descriptors();
// Five groups used in dataset mode; the first is safety_descriptors().
std::vector<DescriptorSet> builtin_descriptor_groups();
std::vector<DescriptorSet> load_descriptor_groups(const std::filesystem::path& path);

// Per-frame descriptor probabilities, [n, |D|]; rows sum to one.
struct MatchResult {
  Tensor p;

  std::size_t frames() const { return p.dim(0); }
  std::size_t classes() const { return p.dim(1); }
  std::size_t argmax(std::size_t row) const;
};

// One-hot rows marking the least probable descriptor of each clean frame.
struct Mask {
  Tensor m;
};

struct LossWeights {
  double alpha = 0.75;  // deceptive-chain alignment
  double beta = 0.05;   // risky-scene inversion
  double gamma = 0.75;  // semantic discrepancy

  // Throws ConfigError on a negative weight or all-zero weights.
  void validate() const;
};

struct LossBreakdown {
  double l_low = 0.0;
  double l_high = 0.0;
  double l_disc = 0.0;
  double l_total = 0.0;
};

// a.b / (|a||b|). Throws DomainError for a zero vector and ShapeError on a
// length mismatch.
double cosine_sim(std::span<const double> a, std::span<const double> b);

// Row-wise softmax over the cosine similarities of every frame embedding
// with every descriptor embedding. No temperature.
MatchResult matching_head(const encoder::DualEncoder& enc, const encoder::ImageSeq& x,
                          const DescriptorSet& descriptors);
// Same head applied to precomputed [n,|D|] cosine similarities.
MatchResult match_from_cosines(const Tensor& cosines);

// Ties go to the lowest column index.
Mask build_mask(const MatchResult& p_clean);

// mean over cells of M*(-log p) + (1-M)*log p. Throws DomainError if any
// p <= 0 and ShapeError on mismatched shapes.
double loss_high(const MatchResult& p_adv, const Mask& mask);

// Mean over chains of 1 - cos(E_v(x+delta), E_t(chain)). Throws
// ConfigError on an empty chain list.
double loss_low(const encoder::DualEncoder& enc, const encoder::ImageSeq& x, const Tensor& delta,
                const std::vector<deception::DeceptiveChain>& chains);

// cos(E_v(x+delta), E_v(x)).
double loss_disc(const encoder::DualEncoder& enc, const encoder::ImageSeq& x,
                 const Tensor& delta);

LossBreakdown combine(double l_low, double l_high, double l_disc, const LossWeights& w);

// Differentiable pieces, for callers that assemble their own graph.
Var cosine(Var a, Var b);
Var matching_probs(Var frame_embeddings, const Tensor& descriptor_embeddings);
Var loss_high_term(Var probs, const Mask& mask);

// The full attack objective for one clean sequence. Everything that does
// not depend on delta (clean embeddings, chain and descriptor embeddings,
// masks) is computed once at construction and held fixed.
class AttackObjective {
 public:
  AttackObjective(const encoder::DualEncoder& enc, encoder::ImageSeq clean,
                  const std::vector<deception::DeceptiveChain>& chains,
                  std::vector<DescriptorSet> groups, LossWeights weights);

  struct Terms {
    Var low, high, disc, total;
  };
  // Records the objective at x + delta on delta's tape.
  Terms record(Var delta) const;

  LossBreakdown evaluate(const Tensor& delta) const;
  // Breakdown plus the gradient of l_total w.r.t. delta.
  std::pair<LossBreakdown, Tensor> evaluate_with_gradient(const Tensor& delta) const;

  // Surrogate matching of x + delta against group `g`.
  MatchResult match(const Tensor& delta, std::size_t g = 0) const;

  const encoder::ImageSeq& clean() const { return clean_; }
  const std::vector<Mask>& masks() const { return masks_; }
  const std::vector<MatchResult>& clean_matches() const { return clean_matches_; }
  const std::vector<DescriptorSet>& groups() const { return groups_; }
  const LossWeights& weights() const { return weights_; }

 private:
  const encoder::DualEncoder* enc_;
  encoder::ImageSeq clean_;
  std::vector<DescriptorSet> groups_;
  LossWeights weights_;
  Tensor clean_embedding_;                  // [1,d]
  std::vector<Tensor> chain_embeddings_;    // each [1,d]
  std::vector<Tensor> group_embeddings_;    // each [|D|,d]
  std::vector<MatchResult> clean_matches_;
  std::vector<Mask> masks_;
};

}  // namespace cascade::objectives

#endif  // CASCADE_OBJECTIVES_OBJECTIVES_HPP_
