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

#include "cascade/harness/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/deception/generator.hpp"
#include "cascade/error.hpp"
#include "cascade/numcore/rng.hpp"
#include "cascade/objectives/objectives.hpp"

namespace cascade::harness {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult grad_check(const GradCheckOptions& options) {
  if (options.instances == 0 || options.coords_per_instance == 0) {
    throw ConfigError("grad_check: instances and coords_per_instance must be >= 1");
  }
  if (!(options.h > 0.0)) throw ConfigError("grad_check: h must be > 0");

  const deception::TemplateGenerator generator;
  std::vector<std::string> plans;
  for (const auto& s : generator.bank().seed_errors()) plans.push_back(s.plan);
  const auto groups = objectives::builtin_descriptor_groups();

  GradCheckResult result;
  numcore::Rng master(options.seed);
  for (std::size_t inst = 0; inst < options.instances; ++inst) {
    numcore::Rng rng = master.split(inst);
    const auto enc = encoder::DualEncoder::initialize(rng.next_u64());
    // Pixels away from 0 and 1 so that x + delta +- h stays valid.
    numcore::Tensor pixels =
        numcore::Tensor::zeros({options.frames, options.height, options.width, encoder::kChannels});
    for (auto& v : pixels.data()) v = rng.uniform(0.2, 0.8);
    const encoder::ImageSeq x(pixels);
    numcore::Tensor delta = numcore::Tensor::zeros(pixels.shape());
    for (auto& v : delta.data()) v = rng.uniform(-0.1, 0.1);

    objectives::LossWeights w{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
    const auto chains =
        deception::query_aggregate(generator, {"", plans, deception::kMaxStages}, 1 + inst % 3);
    const objectives::AttackObjective objective(enc, x, chains, groups, w);
    const auto grad = objective.evaluate_with_gradient(delta).second;

    for (std::size_t c = 0; c < options.coords_per_instance; ++c) {
      const auto idx = static_cast<std::size_t>(rng.below(delta.size()));
      numcore::Tensor plus = delta, minus = delta;
      plus[idx] += options.h;
      minus[idx] -= options.h;
      const double numeric =
          (objective.evaluate(plus).l_total - objective.evaluate(minus).l_total) / (2 * options.h);
      const double err = relative_error(grad[idx], numeric);
      ++result.coords_checked;
      if (err > result.max_rel_err || result.coords_checked == 1) {
        result.max_rel_err = err;
        result.worst_instance = inst;
        result.worst_index = idx;
        result.worst_analytic = grad[idx];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace cascade::harness
