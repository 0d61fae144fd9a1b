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

#ifndef CASCADE_DECEPTION_TEMPLATE_BANK_HPP_
#define CASCADE_DECEPTION_TEMPLATE_BANK_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascade/deception/chain.hpp"
#include "json.hpp"

namespace cascade::deception {

// One planning error together with the causes that would lead a driving
// model to it: plan <- prediction <- perception.
struct SeedError {
  std::string category;
  std::string plan;
  std::string prediction;
  std::string perception;
};

// Deterministic reversal-reasoning bank. Given a stage text it names the
// cause one stage earlier.
class TemplateBank {
 public:
  // The six built-in seed errors. Identical to assets/template_bank.json.
  static TemplateBank builtin();
  // Throws ConfigError on a malformed bank (duplicate category, empty text,
  // unsupported version).
  static TemplateBank from_json(const nlohmann::json& j);
  static TemplateBank load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::string& id() const { return id_; }
  const std::vector<SeedError>& seed_errors() const { return seeds_; }
  std::vector<std::string> categories() const;
  const SeedError& seed(const std::string& category) const;

  // Category whose text at `label` equals `text`, if any.
  std::optional<std::string> category_of(StageLabel label, const std::string& text) const;

  // Text of `category` at `label`. Throws ConfigError for an unknown
  // category (the message lists the known ones).
  const std::string& text_at(const std::string& category, StageLabel label) const;

  // Generic causes used when an endpoint fails on free text that the bank
  // cannot classify.
  const std::string& fallback_text(StageLabel label) const;

 private:
  std::string id_;
  std::vector<SeedError> seeds_;
  std::string fallback_prediction_;
  std::string fallback_perception_;
};

}  // namespace cascade::deception

#endif  // CASCADE_DECEPTION_TEMPLATE_BANK_HPP_
