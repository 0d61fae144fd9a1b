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

#include "cascade/optimizer/attack.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "cascade/error.hpp"

namespace cascade::optimizer {

using objectives::LossBreakdown;
using objectives::MatchResult;

double AttackConfig::step_size(bool patch_mode) const {
  if (step) return *step;
  const double scale = patch_mode ? 1.0 : epsilon;
  return 2.5 * scale / static_cast<double>(iterations);
}

void AttackConfig::validate(bool patch_mode) const {
  weights.validate();
  if (iterations < 1) throw ConfigError("attack config: iterations N must be >= 1");
  if (!patch_mode && !(epsilon > 0.0)) throw ConfigError("attack config: epsilon must be > 0");
  if (!(momentum >= 0.0)) throw ConfigError("attack config: momentum must be >= 0");
  if (!(step_size(patch_mode) > 0.0)) throw ConfigError("attack config: step must be > 0");
}

nlohmann::json to_json(const AttackConfig& cfg) {
  nlohmann::json j = {{"alpha", cfg.weights.alpha},     {"beta", cfg.weights.beta},
                      {"gamma", cfg.weights.gamma},     {"epsilon", cfg.epsilon},
                      {"iterations", cfg.iterations},   {"momentum", cfg.momentum},
                      {"seed", cfg.seed}};
  j["step"] = cfg.step ? nlohmann::json(*cfg.step) : nlohmann::json(nullptr);
  return j;
}

AttackConfig attack_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {"alpha",      "beta",     "gamma", "epsilon",
                                              "iterations", "momentum", "step",  "seed"};
  if (!j.is_object()) throw ConfigError("attack config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw ConfigError("attack config: unknown key '" + key + "'");
  }
  AttackConfig cfg;
  try {
    cfg.weights.alpha = j.value("alpha", cfg.weights.alpha);
    cfg.weights.beta = j.value("beta", cfg.weights.beta);
    cfg.weights.gamma = j.value("gamma", cfg.weights.gamma);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    if (j.contains("iterations")) {
      const auto n = j.at("iterations").get<long long>();
      if (n < 0) throw ConfigError("attack config: iterations N must be >= 1");
      cfg.iterations = static_cast<std::size_t>(n);
    }
    cfg.momentum = j.value("momentum", cfg.momentum);
    if (j.contains("step") && !j.at("step").is_null()) cfg.step = j.at("step").get<double>();
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("attack config: ") + e.what());
  }
  return cfg;
}

bool momentum_step(MomentumState& state, const Tensor& grad, double mu, double eta, Tensor& delta,
                   const encoder::ImageSeq& x, const ConstraintMode& mode) {
  if (grad.shape() != delta.shape()) {
    throw ShapeError("momentum_step: gradient " + numcore::shape_string(grad.shape()) +
                     " vs delta " + numcore::shape_string(delta.shape()));
  }
  double l1 = 0.0;
  for (double g : grad.data()) l1 += std::abs(g);
  if (l1 == 0.0) return false;

  if (state.velocity.empty()) state.velocity = Tensor::zeros(grad.shape());
  auto& v = state.velocity;
  Tensor stepped = delta;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = mu * v[i] + grad[i] / l1;
    const double sign = (v[i] > 0.0) - (v[i] < 0.0);
    stepped[i] -= eta * sign;
  }
  delta = project(stepped, x, mode);
  return true;
}

nlohmann::json to_json(const AttackReport& report, bool include_timing) {
  auto breakdown = [](const LossBreakdown& b) {
    return nlohmann::json{
        {"l_low", b.l_low}, {"l_high", b.l_high}, {"l_disc", b.l_disc}, {"l_total", b.l_total}};
  };
  auto rows = [](const MatchResult& m) {
    nlohmann::json out = nlohmann::json::array();
    if (m.p.empty()) return out;
    for (std::size_t r = 0; r < m.frames(); ++r) {
      std::vector<double> row(m.classes());
      for (std::size_t c = 0; c < m.classes(); ++c) row[c] = m.p.at(r, c);
      out.push_back(row);
    }
    return out;
  };
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& b : report.loss_trace) trace.push_back(breakdown(b));
  nlohmann::json j = {{"rng", numcore::Rng::kAlgorithm},
                      {"iterations", report.loss_trace.size()},
                      {"loss_trace", trace},
                      {"final_loss", breakdown(report.final_loss)},
                      {"delta_checksum", report.delta_checksum},
                      {"mask_checksum", report.mask_checksum},
                      {"clean_match", rows(report.clean_match)},
                      {"adv_match", rows(report.adv_match)},
                      {"flipped", report.flipped},
                      {"skipped_steps", report.skipped_steps}};
  if (include_timing) j["wall_time_ms"] = report.wall_time_ms;
  return j;
}

namespace {

void require_finite(const LossBreakdown& b, std::size_t iteration) {
  if (std::isfinite(b.l_total) && std::isfinite(b.l_low) && std::isfinite(b.l_high) &&
      std::isfinite(b.l_disc)) {
    return;
  }
  throw NumericError("run_attack: non-finite loss at iteration " + std::to_string(iteration) +
                     " (l_low=" + std::to_string(b.l_low) + ", l_high=" +
                     std::to_string(b.l_high) + ", l_disc=" + std::to_string(b.l_disc) +
                     ", l_total=" + std::to_string(b.l_total) + ")");
}

Tensor initial_delta(const encoder::ImageSeq& x, const ConstraintMode& mode, std::uint64_t seed) {
  if (std::holds_alternative<LInfBall>(mode)) return Tensor::zeros(x.pixels().shape());
  // Random patch content in [0,1], expressed as an offset from the image.
  numcore::Rng rng(seed);
  Tensor delta = Tensor::zeros(x.pixels().shape());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = rng.uniform() - x.pixels()[i];
  return project(delta, x, mode);
}

}  // namespace

std::pair<Perturbation, AttackReport> run_attack(
    const encoder::DualEncoder& surrogate, const encoder::ImageSeq& x, const AttackConfig& cfg,
    const std::vector<deception::DeceptiveChain>& chains,
    const std::vector<objectives::DescriptorSet>& groups, std::optional<PatchMode> patch,
    const IterationObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  const bool patch_mode = patch.has_value();
  cfg.validate(patch_mode);
  ConstraintMode mode = patch_mode ? ConstraintMode(std::move(*patch))
                                   : ConstraintMode(LInfBall{cfg.epsilon});
  const double eta = cfg.step_size(patch_mode);

  objectives::AttackObjective objective(surrogate, x, chains, groups, cfg.weights);
  Tensor delta = initial_delta(x, mode, cfg.seed);
  MomentumState momentum;

  AttackReport report;
  report.loss_trace.reserve(cfg.iterations);
  report.mask_checksum = numcore::checksum_hex(objective.masks().front().m);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    auto [loss, grad] = objective.evaluate_with_gradient(delta);
    require_finite(loss, it);
    report.loss_trace.push_back(loss);
    if (observer) observer(IterationEvent{it, loss, delta, objective});
    if (!momentum_step(momentum, grad, cfg.momentum, eta, delta, x, mode)) ++report.skipped_steps;
  }

  report.final_loss = objective.evaluate(delta);
  require_finite(report.final_loss, cfg.iterations);
  report.delta_checksum = numcore::checksum_hex(delta);
  report.clean_match = objective.clean_matches().front();
  report.adv_match = objective.match(delta);
  for (std::size_t f = 0; f < x.frames(); ++f) {
    report.flipped.push_back(report.clean_match.argmax(f) != report.adv_match.argmax(f));
  }
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {Perturbation{std::move(delta), std::move(mode)}, std::move(report)};
}

}  // namespace cascade::optimizer
