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

#ifndef CASCADE_HARNESS_CONFIG_HPP_
#define CASCADE_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cascade/deception/generator.hpp"
#include "cascade/forge/dataset.hpp"
#include "cascade/harness/defense.hpp"
#include "cascade/optimizer/attack.hpp"
#include "json.hpp"

namespace cascade::harness {

struct EncoderConfig {
  std::uint64_t seed = 0;
  encoder::EncoderDims dims;
};

struct ChainConfig {
  std::size_t k = 1;
  std::size_t n_stages = deception::kMaxStages;
  std::vector<std::string> plan_errors = forge::default_plan_errors();
  std::optional<std::string> template_bank;  // JSON file; builtin when unset
  std::optional<deception::GeneratorEndpoint> endpoint;
};

struct PatchConfig {
  double fraction = 0.12;
  optimizer::PatchSemantics semantics = optimizer::PatchSemantics::kArea;
};

struct CorpusConfig {
  std::size_t count = 32;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t frames = 2;
  forge::CorpusKind kind = forge::CorpusKind::kScene;
  std::uint64_t seed = 1;
};

struct DatasetConfig {
  forge::SeverityPlan plan = forge::SeverityPlan::scene();
  std::size_t n_chains = 5;
  std::size_t workers = 1;
};

struct EvalConfig {
  DefenseSpec defense = NoDefense{};
  std::size_t workers = 1;
};

// Everything a CLI run depends on. Every field has a default, so "{}" is a
// complete config.
struct RunConfig {
  optimizer::AttackConfig attack;
  EncoderConfig surrogate{42, {}};
  EncoderConfig victim{7, {}};
  ChainConfig chains;
  // Descriptor groups file; builtin groups when unset. Single attacks use
  // the first group, dataset generation uses all of them.
  std::optional<std::string> descriptor_groups;
  std::optional<PatchConfig> patch;  // attack subcommand only
  CorpusConfig corpus;
  DatasetConfig dataset;
  EvalConfig eval;

  // Cross-field checks; throws ConfigError.
  void validate() const;

  std::vector<objectives::DescriptorSet> groups() const;
  std::unique_ptr<deception::CauseGenerator> make_generator() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Unknown keys anywhere are rejected with their dotted path.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace cascade::harness

#endif  // CASCADE_HARNESS_CONFIG_HPP_
