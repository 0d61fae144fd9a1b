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

#ifndef CASCADE_HARNESS_EVAL_HPP_
#define CASCADE_HARNESS_EVAL_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cascade/forge/dataset.hpp"
#include "cascade/harness/defense.hpp"
#include "cascade/objectives/objectives.hpp"
#include "json.hpp"

namespace cascade::harness {

// Frame counts and margin sums for one clean/adversarial pair. Plain sums
// so that partial results combine in any order.
struct PairOutcome {
  std::size_t frames = 0;
  std::size_t flips = 0;
  double margin_drop_sum = 0.0;

  PairOutcome& operator+=(const PairOutcome& o) {
    frames += o.frames;
    flips += o.flips;
    margin_drop_sum += o.margin_drop_sum;
    return *this;
  }
};

// p[argmax_clean] - max over the other descriptors, per frame.
double margin(const objectives::MatchResult& m, std::size_t row, std::size_t reference_class);

// Victim matching of clean and adversarial after applying `defense` to both.
PairOutcome compare_pair(const encoder::DualEncoder& victim, const encoder::ImageSeq& clean,
                         const encoder::ImageSeq& adversarial,
                         const objectives::DescriptorSet& descriptors, const DefenseSpec& defense);

struct LevelStats {
  std::size_t level = 0;
  double severity = 0.0;
  std::size_t entries = 0;
  PairOutcome outcome;
  double flip_rate() const;
  double mean_margin_drop() const;
};

struct EvalSummary {
  std::size_t corpus_size = 0;  // distinct records with a level-0 entry
  std::size_t adversarial_entries = 0;
  PairOutcome outcome;  // over every adversarial frame
  double flip_rate = 0.0;
  double mean_margin_drop = 0.0;
  std::map<std::size_t, LevelStats> per_level;  // keyed by severity level 1..4
  std::string defense;
  std::uint64_t victim_seed = 0;
  bool incomplete = false;
  std::vector<std::string> errors;  // "<record id> level <k>: <reason>"
};

nlohmann::json to_json(const EvalSummary& s);

// Scores every adversarial entry against the level-0 entry of its record.
// Entries that cannot be evaluated (missing clean entry, unreadable image)
// are listed in errors and mark the summary incomplete. Throws ConfigError
// if any entry was generated with the victim's own seed.
EvalSummary eval_transfer(const encoder::DualEncoder& victim,
                          const std::vector<forge::ManifestEntry>& manifest,
                          const objectives::DescriptorSet& descriptors,
                          const DefenseSpec& defense, std::size_t workers = 1);

// Random +-eps corners of the ell-inf ball, projected onto valid pixels:
// the equal-budget noise baseline.
numcore::Tensor random_sign_delta(const encoder::ImageSeq& x, double epsilon, numcore::Rng& rng);

}  // namespace cascade::harness

#endif  // CASCADE_HARNESS_EVAL_HPP_
