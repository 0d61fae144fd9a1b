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

#include "cascade/forge/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "cascade/error.hpp"
#include "cascade/forge/image_io.hpp"
#include "cascade/numcore/hash.hpp"

namespace cascade::forge {

namespace fs = std::filesystem;
using optimizer::PatchRegion;

SeverityPlan SeverityPlan::scene() { return {SeverityMode::kScene, {0.02, 0.04, 0.06, 0.08}}; }

SeverityPlan SeverityPlan::object() {
  return {SeverityMode::kObject, {0.10, 0.15, 0.20, 0.25}, optimizer::PatchSemantics::kSideLength};
}

void SeverityPlan::validate() const {
  if (levels.size() != kAdversarialLevels) {
    throw ConfigError("severity plan: expected " + std::to_string(kAdversarialLevels) +
                      " levels, got " + std::to_string(levels.size()));
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double v = levels[i];
    if (!(v > 0.0) || (mode == SeverityMode::kObject && v > 1.0)) {
      throw ConfigError("severity plan: level " + std::to_string(i + 1) + " value " +
                        std::to_string(v) + " out of range");
    }
    if (i > 0 && !(v > levels[i - 1])) {
      throw ConfigError("severity plan: levels must be strictly increasing");
    }
  }
}

std::string to_string(SeverityMode mode) {
  return mode == SeverityMode::kScene ? "scene" : "object";
}

SeverityMode severity_mode_from_string(const std::string& s) {
  if (s == "scene") return SeverityMode::kScene;
  if (s == "object") return SeverityMode::kObject;
  throw ConfigError("severity plan: unknown mode '" + s + "' (expected scene or object)");
}

nlohmann::json to_json(const SeverityPlan& plan) {
  return {{"mode", to_string(plan.mode)},
          {"levels", plan.levels},
          {"patch_semantics",
           plan.semantics == optimizer::PatchSemantics::kArea ? "area" : "side"}};
}

SeverityPlan severity_plan_from_json(const nlohmann::json& j) {
  try {
    const auto mode = severity_mode_from_string(j.at("mode").get<std::string>());
    SeverityPlan plan = mode == SeverityMode::kScene ? SeverityPlan::scene() : SeverityPlan::object();
    if (j.contains("levels")) plan.levels = j.at("levels").get<std::vector<double>>();
    if (j.contains("patch_semantics")) {
      const auto s = j.at("patch_semantics").get<std::string>();
      if (s == "area") {
        plan.semantics = optimizer::PatchSemantics::kArea;
      } else if (s == "side") {
        plan.semantics = optimizer::PatchSemantics::kSideLength;
      } else {
        throw ConfigError("severity plan: patch_semantics must be 'side' or 'area', got '" + s +
                          "'");
      }
    }
    plan.validate();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("severity plan: ") + e.what());
  }
}

nlohmann::json to_json(const ManifestEntry& e) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : e.regions) {
    regions.push_back({{"top", r.top}, {"left", r.left}, {"height", r.height}, {"width", r.width}});
  }
  return {{"record_id", e.record_id},
          {"level", e.level},
          {"severity", e.severity},
          {"images", e.image_paths},
          {"config_digest", e.config_digest},
          {"question", e.question},
          {"answer", e.answer},
          {"task", e.task},
          {"used_fallback", e.used_fallback},
          {"quantized_linf", e.quantized_linf},
          {"delta_checksum", e.delta_checksum},
          {"regions", regions},
          {"surrogate_seed", e.surrogate_seed},
          {"rng", numcore::Rng::kAlgorithm}};
}

ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
  try {
    ManifestEntry e;
    e.record_id = j.at("record_id").get<std::string>();
    e.level = j.at("level").get<std::size_t>();
    e.severity = j.at("severity").get<double>();
    e.image_paths = j.at("images").get<std::vector<std::string>>();
    e.config_digest = j.value("config_digest", std::string());
    e.question = j.value("question", std::string());
    e.answer = j.value("answer", std::string());
    e.task = j.value("task", std::string());
    e.used_fallback = j.value("used_fallback", false);
    e.quantized_linf = j.value("quantized_linf", 0.0);
    e.delta_checksum = j.value("delta_checksum", std::string());
    for (const auto& r : j.value("regions", nlohmann::json::array())) {
      e.regions.push_back({r.at("top").get<std::size_t>(), r.at("left").get<std::size_t>(),
                           r.at("height").get<std::size_t>(), r.at("width").get<std::size_t>()});
    }
    e.surrogate_seed = j.at("surrogate_seed").get<std::uint64_t>();
    if (e.level > kAdversarialLevels) {
      throw ConfigError("manifest entry " + e.record_id + ": level " + std::to_string(e.level) +
                        " out of range");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("manifest entry: ") + ex.what());
  }
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& e : entries) out << to_json(e).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(manifest_entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

double save_adversarial(const encoder::ImageSeq& x, const Tensor& delta,
                        const std::vector<fs::path>& frame_paths) {
  if (frame_paths.size() != x.frames()) {
    throw ConfigError("save_adversarial: " + std::to_string(frame_paths.size()) +
                      " paths for " + std::to_string(x.frames()) + " frames");
  }
  const auto adv = optimizer::apply_delta(x, delta);
  double linf = 0.0;
  for (std::size_t f = 0; f < x.frames(); ++f) {
    const Tensor frame = adv.frame(f);
    save_png(frame, frame_paths[f]);
    const Tensor q = quantize(frame);
    const Tensor clean = x.frame(f);
    for (std::size_t i = 0; i < q.size(); ++i) linf = std::max(linf, std::abs(q[i] - clean[i]));
  }
  return linf;
}

std::vector<std::string> default_plan_errors() {
  const auto bank = deception::TemplateBank::builtin();
  std::vector<std::string> out;
  for (const auto& s : bank.seed_errors()) out.push_back(s.plan);
  return out;
}

std::string config_digest(const encoder::DualEncoder& surrogate, const SeverityPlan& plan,
                          const DatasetOptions& options, const std::string& generator_id) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : options.groups) {
    groups.push_back({{"id", g.group_id}, {"descriptors", g.descriptors}});
  }
  const nlohmann::json canonical = {
      {"attack", optimizer::to_json(options.attack)},
      {"plan", to_json(plan)},
      {"surrogate",
       {{"seed", surrogate.seed()},
        {"patch_size", surrogate.dims().patch_size},
        {"hidden", surrogate.dims().hidden},
        {"embed", surrogate.dims().embed}}},
      {"n_chains", options.n_chains},
      {"plan_errors", options.plan_errors},
      {"groups", groups},
      {"generator", generator_id},
      {"rng", numcore::Rng::kAlgorithm}};
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  return numcore::to_hex(numcore::fnv1a(canonical.dump()));
}

namespace {

std::string generator_id(const deception::CauseGenerator& generator) {
  if (const auto* t = dynamic_cast<const deception::TemplateGenerator*>(&generator)) {
    return "template:" + t->bank().id();
  }
  if (const auto* e = dynamic_cast<const deception::EndpointGenerator*>(&generator)) {
    return "endpoint:" + e->endpoint().base_url;
  }
  return "custom";
}

std::vector<ManifestEntry> process_record(const encoder::DualEncoder& surrogate,
                                          const SceneRecord& record, const SeverityPlan& plan,
                                          const DatasetOptions& options,
                                          const deception::CauseGenerator& generator,
                                          const fs::path& out_dir, const std::string& digest) {
  const auto x = load_frames(record);
  // Seeded from the record id so that regenerating a subset reproduces the
  // same placement and trajectories.
  const std::uint64_t record_seed = numcore::mix_seed(options.attack.seed, numcore::fnv1a(record.id));

  deception::ChainRequest request{record.question, options.plan_errors, deception::kMaxStages};
  const auto chains = deception::query_aggregate(generator, request, options.n_chains);
  const bool fallback =
      std::any_of(chains.begin(), chains.end(), [](const auto& c) { return c.used_fallback; });

  ManifestEntry base;
  base.record_id = record.id;
  base.config_digest = digest;
  base.question = record.question;
  base.answer = record.answer;
  base.task = record.task;
  base.surrogate_seed = surrogate.seed();

  std::vector<ManifestEntry> entries;
  ManifestEntry clean = base;
  clean.image_paths = record.frame_paths;
  entries.push_back(std::move(clean));

  numcore::Rng placement(record_seed);
  for (std::size_t level = 1; level <= kAdversarialLevels; ++level) {
    const double severity = plan.levels[level - 1];
    optimizer::AttackConfig cfg = options.attack;
    cfg.seed = numcore::mix_seed(record_seed, level);
    std::optional<optimizer::PatchMode> patch;
    if (plan.mode == SeverityMode::kScene) {
      cfg.epsilon = severity;
    } else {
      optimizer::PatchMode mode;
      for (std::size_t f = 0; f < x.frames(); ++f) {
        mode.regions.push_back(
            optimizer::place_patch(x.height(), x.width(), severity, plan.semantics, placement));
      }
      patch = std::move(mode);
    }
    auto [pert, report] = optimizer::run_attack(surrogate, x, cfg, chains, options.groups, patch);

    ManifestEntry e = base;
    e.level = level;
    e.severity = severity;
    e.used_fallback = fallback;
    e.delta_checksum = report.delta_checksum;
    if (patch) e.regions = patch->regions;
    std::vector<fs::path> paths;
    for (std::size_t f = 0; f < x.frames(); ++f) {
      paths.push_back(out_dir / ("level_" + std::to_string(level)) /
                      (record.id + "_frame_" + std::to_string(f) + ".png"));
      e.image_paths.push_back(paths.back().string());
    }
    e.quantized_linf = save_adversarial(x, pert.delta, paths);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

DatasetResult generate_dataset(const encoder::DualEncoder& surrogate,
                               const std::vector<SceneRecord>& records, const SeverityPlan& plan,
                               const DatasetOptions& options,
                               const deception::CauseGenerator& generator,
                               const fs::path& out_dir) {
  if (records.empty()) throw ConfigError("generate_dataset: no records");
  plan.validate();
  options.attack.validate(plan.mode == SeverityMode::kObject);
  if (options.n_chains == 0) throw ConfigError("generate_dataset: n_chains must be >= 1");
  if (options.plan_errors.empty()) throw ConfigError("generate_dataset: no plan errors");
  if (options.groups.empty()) throw ConfigError("generate_dataset: no descriptor groups");
  for (const auto& g : options.groups) g.validate();

  DatasetResult result;
  result.config_digest = config_digest(surrogate, plan, options, generator_id(generator));
  result.manifest_path = out_dir / "manifest.jsonl";
  ensure_directory(out_dir);
  std::ofstream manifest(result.manifest_path, std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + result.manifest_path.string());

  // Workers fill per-record slots; the writer flushes slots in record order
  // as soon as every earlier record has finished, so the manifest is the
  // same whatever the scheduling.
  struct Slot {
    bool done = false;
    std::vector<ManifestEntry> entries;
    std::string error;
  };
  std::vector<Slot> slots(records.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      Slot s;
      try {
        s.entries =
            process_record(surrogate, records[i], plan, options, generator, out_dir,
                           result.config_digest);
      } catch (const std::exception& e) {
        s.error = e.what();
      }
      s.done = true;
      {
        std::lock_guard lock(mu);
        slots[i] = std::move(s);
      }
      cv.notify_one();
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(options.workers, 1, records.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);

  for (std::size_t i = 0; i < records.size(); ++i) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return slots[i].done; });
    Slot s = std::move(slots[i]);
    lock.unlock();
    if (!s.error.empty()) {
      std::clog << "gen-dataset: skipping record " << records[i].id << ": " << s.error << '\n';
      result.failures.push_back(records[i].id + ": " + s.error);
      continue;
    }
    for (auto& e : s.entries) {
      manifest << to_json(e).dump() << '\n';
      result.entries.push_back(std::move(e));
    }
    manifest.flush();
  }
  if (!manifest) throw IoError("write failed: " + result.manifest_path.string());
  return result;
}

}  // namespace cascade::forge
