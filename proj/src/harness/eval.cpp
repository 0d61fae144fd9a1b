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

#include "cascade/harness/eval.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "cascade/error.hpp"
#include "cascade/optimizer/perturbation.hpp"

namespace cascade::harness {

double margin(const objectives::MatchResult& m, std::size_t row, std::size_t reference_class) {
  double other = -1.0;
  for (std::size_t c = 0; c < m.classes(); ++c) {
    if (c != reference_class) other = std::max(other, m.p.at(row, c));
  }
  return m.p.at(row, reference_class) - other;
}

PairOutcome compare_pair(const encoder::DualEncoder& victim, const encoder::ImageSeq& clean,
                         const encoder::ImageSeq& adversarial,
                         const objectives::DescriptorSet& descriptors,
                         const DefenseSpec& defense) {
  if (clean.pixels().shape() != adversarial.pixels().shape()) {
    throw ShapeError("compare_pair: clean " + numcore::shape_string(clean.pixels().shape()) +
                     " vs adversarial " + numcore::shape_string(adversarial.pixels().shape()));
  }
  const auto pc = objectives::matching_head(victim, apply_defense(clean, defense), descriptors);
  const auto pa =
      objectives::matching_head(victim, apply_defense(adversarial, defense), descriptors);
  PairOutcome out;
  for (std::size_t f = 0; f < pc.frames(); ++f) {
    const auto ref = pc.argmax(f);
    ++out.frames;
    out.flips += pa.argmax(f) != ref;
    out.margin_drop_sum += margin(pc, f, ref) - margin(pa, f, ref);
  }
  return out;
}

double LevelStats::flip_rate() const {
  return outcome.frames == 0 ? 0.0 : static_cast<double>(outcome.flips) / outcome.frames;
}

double LevelStats::mean_margin_drop() const {
  return outcome.frames == 0 ? 0.0 : outcome.margin_drop_sum / outcome.frames;
}

nlohmann::json to_json(const EvalSummary& s) {
  nlohmann::json levels = nlohmann::json::object();
  for (const auto& [level, st] : s.per_level) {
    levels[std::to_string(level)] = {{"severity", st.severity},
                                     {"entries", st.entries},
                                     {"frames", st.outcome.frames},
                                     {"flips", st.outcome.flips},
                                     {"flip_rate", st.flip_rate()},
                                     {"mean_margin_drop", st.mean_margin_drop()}};
  }
  return {{"corpus_size", s.corpus_size},
          {"adversarial_entries", s.adversarial_entries},
          {"frames", s.outcome.frames},
          {"flips", s.outcome.flips},
          {"flip_rate", s.flip_rate},
          {"mean_margin_drop", s.mean_margin_drop},
          {"per_level", levels},
          {"defense", s.defense},
          {"victim_seed", s.victim_seed},
          {"incomplete", s.incomplete},
          {"errors", s.errors}};
}

EvalSummary eval_transfer(const encoder::DualEncoder& victim,
                          const std::vector<forge::ManifestEntry>& manifest,
                          const objectives::DescriptorSet& descriptors,
                          const DefenseSpec& defense, std::size_t workers) {
  descriptors.validate();
  validate(defense);
  std::map<std::string, const forge::ManifestEntry*> clean;
  for (const auto& e : manifest) {
    if (e.surrogate_seed == victim.seed()) {
      throw ConfigError("eval_transfer: victim seed " + std::to_string(victim.seed()) +
                        " equals the surrogate seed of record " + e.record_id);
    }
    if (e.level == 0) clean.emplace(e.record_id, &e);
  }
  std::vector<const forge::ManifestEntry*> adversarial;
  for (const auto& e : manifest) {
    if (e.level > 0) adversarial.push_back(&e);
  }

  EvalSummary summary;
  summary.corpus_size = clean.size();
  summary.adversarial_entries = adversarial.size();
  summary.defense = to_string(defense);
  summary.victim_seed = victim.seed();

  std::vector<PairOutcome> outcomes(adversarial.size());
  std::vector<std::string> errors(adversarial.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < adversarial.size(); i = next++) {
      const auto& e = *adversarial[i];
      try {
        const auto it = clean.find(e.record_id);
        if (it == clean.end()) throw ConfigError("no level-0 entry");
        forge::SceneRecord c{e.record_id, it->second->image_paths, "", "", ""};
        forge::SceneRecord a{e.record_id, e.image_paths, "", "", ""};
        outcomes[i] = compare_pair(victim, forge::load_frames(c), forge::load_frames(a),
                                   descriptors, defense);
      } catch (const std::exception& ex) {
        errors[i] = e.record_id + " level " + std::to_string(e.level) + ": " + ex.what();
      }
    }
  };
  const std::size_t n_workers =
      std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(adversarial.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < adversarial.size(); ++i) {
    const auto& e = *adversarial[i];
    if (!errors[i].empty()) {
      summary.errors.push_back(errors[i]);
      continue;
    }
    auto& level = summary.per_level[e.level];
    level.level = e.level;
    level.severity = e.severity;
    ++level.entries;
    level.outcome += outcomes[i];
    summary.outcome += outcomes[i];
  }
  summary.incomplete = !summary.errors.empty();
  if (summary.outcome.frames > 0) {
    summary.flip_rate = static_cast<double>(summary.outcome.flips) / summary.outcome.frames;
    summary.mean_margin_drop = summary.outcome.margin_drop_sum / summary.outcome.frames;
  }
  return summary;
}

numcore::Tensor random_sign_delta(const encoder::ImageSeq& x, double epsilon, numcore::Rng& rng) {
  if (!(epsilon > 0.0)) throw ConfigError("random_sign_delta: epsilon must be > 0");
  numcore::Tensor delta = numcore::Tensor::zeros(x.pixels().shape());
  for (auto& v : delta.data()) v = rng.below(2) == 0 ? -epsilon : epsilon;
  return optimizer::project(delta, x, optimizer::LInfBall{epsilon});
}

}  // namespace cascade::harness
