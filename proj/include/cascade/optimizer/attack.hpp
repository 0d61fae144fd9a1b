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

#ifndef CASCADE_OPTIMIZER_ATTACK_HPP_
#define CASCADE_OPTIMIZER_ATTACK_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cascade/objectives/objectives.hpp"
#include "cascade/optimizer/perturbation.hpp"
#include "json.hpp"

namespace cascade::optimizer {

struct AttackConfig {
  objectives::LossWeights weights;
  double epsilon = 0.1;
  std::size_t iterations = 160;
  double momentum = 1.0;
  // Signed step per iteration. Unset: 2.5 * epsilon / iterations for the
  // ell-inf ball, 2.5 / iterations for patches.
  std::optional<double> step;
  std::uint64_t seed = 0;

  double step_size(bool patch_mode = false) const;
  // Throws ConfigError naming the violated precondition.
  void validate(bool patch_mode = false) const;
};

nlohmann::json to_json(const AttackConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
AttackConfig attack_config_from_json(const nlohmann::json& j);

struct MomentumState {
  Tensor velocity;  // empty until the first step
};

// velocity <- mu * velocity + grad / |grad|_1
// delta    <- project(delta - eta * sign(velocity))
// Returns false and leaves everything untouched when |grad|_1 == 0.
bool momentum_step(MomentumState& state, const Tensor& grad, double mu, double eta, Tensor& delta,
                   const encoder::ImageSeq& x, const ConstraintMode& mode);

struct AttackReport {
  std::vector<objectives::LossBreakdown> loss_trace;  // loss at the start of each iteration
  objectives::LossBreakdown final_loss;               // loss at the returned delta
  std::string delta_checksum;
  std::string mask_checksum;
  objectives::MatchResult clean_match;  // surrogate, first descriptor group
  objectives::MatchResult adv_match;
  std::vector<bool> flipped;            // per frame, surrogate argmax changed
  std::size_t skipped_steps = 0;        // iterations with a zero gradient
  double wall_time_ms = 0.0;
};

// Timing is left out when include_timing is false so reports of repeated
// runs compare byte-for-byte.
nlohmann::json to_json(const AttackReport& report, bool include_timing = true);

struct IterationEvent {
  std::size_t iteration;
  const objectives::LossBreakdown& loss;
  const Tensor& delta;  // before this iteration's step
  const objectives::AttackObjective& objective;
};
using IterationObserver = std::function<void(const IterationEvent&)>;

// Momentum descent on the weighted objective. Delta starts at zero for the
// ell-inf ball, or at a uniform random patch (re-expressed as a delta) in
// patch mode. Deterministic given cfg.seed. Throws ConfigError for an
// invalid cfg and NumericError (naming the iteration) on a non-finite loss.
std::pair<Perturbation, AttackReport> run_attack(
    const encoder::DualEncoder& surrogate, const encoder::ImageSeq& x, const AttackConfig& cfg,
    const std::vector<deception::DeceptiveChain>& chains,
    const std::vector<objectives::DescriptorSet>& groups,
    std::optional<PatchMode> patch = std::nullopt, const IterationObserver& observer = {});

}  // namespace cascade::optimizer

#endif  // CASCADE_OPTIMIZER_ATTACK_HPP_
