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

#ifndef CASCADE_FORGE_DATASET_HPP_
#define CASCADE_FORGE_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascade/deception/generator.hpp"
#include "cascade/forge/records.hpp"
#include "cascade/optimizer/attack.hpp"
#include "json.hpp"

namespace cascade::forge {

enum class SeverityMode { kScene, kObject };

// Level k (1-based) uses levels[k-1]: an ell-inf budget in scene mode, a
// patch fraction in object mode. Level 0 is the clean image.
struct SeverityPlan {
  SeverityMode mode = SeverityMode::kScene;
  std::vector<double> levels;
  optimizer::PatchSemantics semantics = optimizer::PatchSemantics::kSideLength;

  static SeverityPlan scene();   // eps 0.02, 0.04, 0.06, 0.08
  static SeverityPlan object();  // side 10%, 15%, 20%, 25%

  // Throws ConfigError unless there are exactly four strictly increasing
  // positive levels (object fractions also <= 1).
  void validate() const;
};

inline constexpr std::size_t kAdversarialLevels = 4;

std::string to_string(SeverityMode mode);
SeverityMode severity_mode_from_string(const std::string& s);
nlohmann::json to_json(const SeverityPlan& plan);
SeverityPlan severity_plan_from_json(const nlohmann::json& j);

struct ManifestEntry {
  std::string record_id;
  std::size_t level = 0;
  double severity = 0.0;  // eps or patch fraction; 0 at level 0
  std::vector<std::string> image_paths;
  std::string config_digest;
  std::string question;
  std::string answer;
  std::string task;
  bool used_fallback = false;  // a deceptive chain was patched from the bank
  double quantized_linf = 0.0;  // max |saved - clean| over all pixels
  std::string delta_checksum;   // of the unquantized delta; empty at level 0
  std::vector<optimizer::PatchRegion> regions;  // object mode only
  std::uint64_t surrogate_seed = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

nlohmann::json to_json(const ManifestEntry& e);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Rounds x + delta to 8 bits and writes one PNG per frame. Returns the
// ell-inf distance between the written pixels and x. Throws DomainError if
// x + delta leaves [0,1] and IoError naming the path on write failure.
double save_adversarial(const encoder::ImageSeq& x, const numcore::Tensor& delta,
                        const std::vector<std::filesystem::path>& frame_paths);

std::vector<std::string> default_plan_errors();

struct DatasetOptions {
  // Template for every run. epsilon is replaced per level in scene mode;
  // seed is the base from which per-record seeds are derived.
  optimizer::AttackConfig attack;
  std::size_t n_chains = 5;
  // Chain j targets plan_errors[j % size]. Defaults to every built-in seed
  // error.
  std::vector<std::string> plan_errors = default_plan_errors();
  std::vector<objectives::DescriptorSet> groups = objectives::builtin_descriptor_groups();
  std::size_t workers = 1;
};

struct DatasetResult {
  std::vector<ManifestEntry> entries;  // record order, then level
  std::vector<std::string> failures;   // "<record id>: <reason>"
  std::string config_digest;
  std::filesystem::path manifest_path;
};

// Hex FNV-1a over the canonical (sorted-key) JSON of everything that
// determines the generated images. `generator_id` names the chain source.
std::string config_digest(const encoder::DualEncoder& surrogate, const SeverityPlan& plan,
                          const DatasetOptions& options, const std::string& generator_id);

// One attack per record and adversarial level. Writes
// out_dir/level_<k>/<id>_frame_<j>.png and out_dir/manifest.jsonl. A
// record that fails (unreadable frames, attack error) is logged, skipped
// entirely, and listed in failures. Throws ConfigError for an empty record
// list or an invalid plan, before anything is written.
DatasetResult generate_dataset(const encoder::DualEncoder& surrogate,
                               const std::vector<SceneRecord>& records, const SeverityPlan& plan,
                               const DatasetOptions& options,
                               const deception::CauseGenerator& generator,
                               const std::filesystem::path& out_dir);

}  // namespace cascade::forge

#endif  // CASCADE_FORGE_DATASET_HPP_
