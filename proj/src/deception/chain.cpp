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

#include "cascade/deception/chain.hpp"

#include "cascade/error.hpp"

namespace cascade::deception {

std::string_view to_string(StageLabel label) {
  switch (label) {
    case StageLabel::kPerception:
      return "perception";
    case StageLabel::kPrediction:
      return "prediction";
    case StageLabel::kPlan:
      return "plan";
  }
  return "unknown";
}

Stage stage_at(std::size_t position, std::size_t n_stages) {
  if (n_stages < 1 || n_stages > kMaxStages) {
    throw ConfigError("chain: n_stages must be in [1, 3], got " + std::to_string(n_stages));
  }
  if (position < 1 || position > n_stages) {
    throw ConfigError("chain: stage position " + std::to_string(position) + " outside [1, " +
                      std::to_string(n_stages) + "]");
  }
  constexpr StageLabel kOrder[kMaxStages] = {StageLabel::kPerception, StageLabel::kPrediction,
                                             StageLabel::kPlan};
  return Stage{kOrder[kMaxStages - n_stages + position - 1], position};
}

std::string join_parts(const std::vector<ChainPart>& parts) {
  if (parts.empty()) throw ConfigError("chain: no parts");
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].text.empty()) throw ConfigError("chain: empty part at position " + std::to_string(i + 1));
    if (i) out += kConnector;
    out += parts[i].text;
  }
  return out;
}

}  // namespace cascade::deception
