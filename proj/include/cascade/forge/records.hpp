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

#ifndef CASCADE_FORGE_RECORDS_HPP_
#define CASCADE_FORGE_RECORDS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cascade/encoder/image_seq.hpp"
#include "cascade/numcore/rng.hpp"
#include "json.hpp"

namespace cascade::forge {

// A clean visual question-answer pair.
struct SceneRecord {
  std::string id;
  std::vector<std::string> frame_paths;
  std::string question;
  std::string answer;
  std::string task;
};

nlohmann::json to_json(const SceneRecord& r);
SceneRecord scene_record_from_json(const nlohmann::json& j);

// One record per line.
void write_records(const std::vector<SceneRecord>& records, const std::filesystem::path& path);
std::vector<SceneRecord> read_records(const std::filesystem::path& path);

// Loads every frame of a record. Throws IoError/ShapeError when a frame
// is missing, undecodable, or sized differently from the first.
encoder::ImageSeq load_frames(const SceneRecord& record);

enum class CorpusKind {
  kScene,   // road scenes with vehicles and a traffic light, several frames
  kObject,  // a single traffic sign on a background
};

struct SyntheticScene {
  SceneRecord record;  // frame_paths empty until written
  encoder::ImageSeq frames;
};

// Procedural stand-in imagery: gradient backgrounds with colored primitives
// and template QA pairs. Fully determined by the rng state. Throws
// ConfigError unless height and width are multiples of `patch_size` and
// n_frames >= 1.
std::vector<SyntheticScene> synth_corpus(numcore::Rng& rng, std::size_t count,
                                         std::size_t height, std::size_t width,
                                         std::size_t n_frames,
                                         CorpusKind kind = CorpusKind::kScene,
                                         std::size_t patch_size = 8);

// Writes out_dir/clean/<id>_frame_<j>.png plus out_dir/records.jsonl and
// returns the records with their paths filled in.
std::vector<SceneRecord> write_corpus(const std::vector<SyntheticScene>& corpus,
                                      const std::filesystem::path& out_dir);

}  // namespace cascade::forge

#endif  // CASCADE_FORGE_RECORDS_HPP_
