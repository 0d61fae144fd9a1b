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

#ifndef CASCADE_DECEPTION_CHAIN_HPP_
#define CASCADE_DECEPTION_CHAIN_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cascade::deception {

enum class StageLabel { kPerception, kPrediction, kPlan };

std::string_view to_string(StageLabel label);

// Position of a stage in a reasoning chain. In an n-stage chain the stages
// are the last n of perception -> prediction -> plan, indexed from 1.
struct Stage {
  StageLabel label = StageLabel::kPlan;
  std::size_t index = 1;

  friend bool operator==(const Stage&, const Stage&) = default;
};

inline constexpr std::size_t kMaxStages = 3;
inline constexpr std::string_view kConnector = ", therefore ";

// Throws ConfigError unless 1 <= position <= n_stages <= kMaxStages.
Stage stage_at(std::size_t position, std::size_t n_stages);

struct ChainPart {
  Stage stage;
  std::string text;
};

struct DeceptiveChain {
  std::vector<ChainPart> parts;  // perception first, plan last
  std::string combined;
  bool used_fallback = false;    // an endpoint failure was patched from the template bank
};

// Joins the parts in stage order with kConnector. Throws ConfigError on an
// empty part list or an empty part.
std::string join_parts(const std::vector<ChainPart>& parts);

}  // namespace cascade::deception

#endif  // CASCADE_DECEPTION_CHAIN_HPP_
