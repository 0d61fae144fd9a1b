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

#include "cascade/harness/cli.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cascade/error.hpp"
#include "cascade/forge/dataset.hpp"
#include "cascade/forge/image_io.hpp"
#include "cascade/harness/config.hpp"
#include "cascade/harness/eval.hpp"
#include "cascade/harness/grad_check.hpp"
#include "cascade/numcore/hash.hpp"

namespace cascade::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "cascade_out";
};

RunConfig resolve_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) {
    cfg.attack.seed = *g.seed;
    cfg.corpus.seed = *g.seed;
  }
  return cfg;
}

void write_json(const json& j, const fs::path& path) {
  forge::ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<forge::SyntheticScene> make_corpus(const CorpusConfig& c) {
  numcore::Rng rng(c.seed);
  return forge::synth_corpus(rng, c.count, c.height, c.width, c.frames, c.kind);
}

std::vector<forge::SceneRecord> records_or_corpus(const std::string& records_path,
                                                  const RunConfig& cfg, const fs::path& out) {
  if (!records_path.empty()) return forge::read_records(records_path);
  return forge::write_corpus(make_corpus(cfg.corpus), out / "corpus");
}

int cmd_synth(const RunConfig& cfg, const Globals& g, std::ostream& out) {
  const auto records = forge::write_corpus(make_corpus(cfg.corpus), g.out);
  out << "wrote " << records.size() << " records to " << (fs::path(g.out) / "records.jsonl").string()
      << '\n';
  return kExitOk;
}

int cmd_attack(const RunConfig& cfg, const Globals& g, const std::string& records_path,
               const std::string& record_id, std::ostream& out) {
  cfg.validate();
  const fs::path out_dir = g.out;
  forge::SceneRecord record;
  encoder::ImageSeq x;
  if (records_path.empty()) {
    auto corpus = make_corpus(cfg.corpus);
    if (corpus.empty()) throw ConfigError("attack: corpus.count is 0");
    auto it = corpus.begin();
    if (!record_id.empty()) {
      it = std::find_if(corpus.begin(), corpus.end(),
                        [&](const auto& s) { return s.record.id == record_id; });
      if (it == corpus.end()) throw ConfigError("attack: no synthetic record '" + record_id + "'");
    }
    record = it->record;
    x = it->frames;
  } else {
    const auto records = forge::read_records(records_path);
    if (records.empty()) throw ConfigError("attack: " + records_path + " has no records");
    auto it = records.begin();
    if (!record_id.empty()) {
      it = std::find_if(records.begin(), records.end(),
                        [&](const auto& r) { return r.id == record_id; });
      if (it == records.end()) throw ConfigError("attack: no record '" + record_id + "'");
    }
    record = *it;
    x = forge::load_frames(record);
  }

  const auto surrogate = encoder::DualEncoder::initialize(cfg.surrogate.seed, cfg.surrogate.dims);
  const auto victim =
      encoder::make_victim(cfg.victim.seed, cfg.surrogate.seed, cfg.victim.dims);
  const auto generator = cfg.make_generator();
  const auto chains = deception::query_aggregate(
      *generator, {record.question, cfg.chains.plan_errors, cfg.chains.n_stages}, cfg.chains.k);
  const auto groups = cfg.groups();
  const std::vector<objectives::DescriptorSet> attack_groups{groups.front()};

  std::optional<optimizer::PatchMode> patch;
  if (cfg.patch) {
    numcore::Rng placement(numcore::mix_seed(cfg.attack.seed, numcore::fnv1a(record.id)));
    optimizer::PatchMode mode;
    for (std::size_t f = 0; f < x.frames(); ++f) {
      mode.regions.push_back(optimizer::place_patch(x.height(), x.width(), cfg.patch->fraction,
                                                    cfg.patch->semantics, placement));
    }
    patch = std::move(mode);
  }

  auto [pert, report] = optimizer::run_attack(surrogate, x, cfg.attack, chains, attack_groups, patch);

  std::vector<fs::path> paths;
  json images = json::array();
  for (std::size_t f = 0; f < x.frames(); ++f) {
    paths.push_back(out_dir / "adversarial" / (record.id + "_frame_" + std::to_string(f) + ".png"));
    images.push_back(paths.back().string());
  }
  const double linf = forge::save_adversarial(x, pert.delta, paths);
  const auto transfer = compare_pair(victim, x, optimizer::apply_delta(x, pert.delta),
                                     groups.front(), NoDefense{});

  json chain_texts = json::array();
  bool fallback = false;
  for (const auto& c : chains) {
    chain_texts.push_back(c.combined);
    fallback = fallback || c.used_fallback;
  }
  json regions = json::array();
  if (patch) {
    for (const auto& r : patch->regions) {
      regions.push_back({{"top", r.top}, {"left", r.left}, {"height", r.height}, {"width", r.width}});
    }
  }
  const json doc = {{"config", to_json(cfg)},
                    {"record_id", record.id},
                    {"chains", chain_texts},
                    {"used_fallback", fallback},
                    {"patch_regions", regions},
                    {"report", to_json(report, false)},
                    {"images", images},
                    {"quantized_linf", linf},
                    {"victim",
                     {{"seed", victim.seed()},
                      {"frames", transfer.frames},
                      {"flips", transfer.flips},
                      {"margin_drop_sum", transfer.margin_drop_sum}}}};
  write_json(doc, out_dir / "report.json");
  out << "record " << record.id << ": l_total " << report.final_loss.l_total << ", delta "
      << report.delta_checksum << ", victim flips " << transfer.flips << "/" << transfer.frames
      << ", " << report.wall_time_ms << " ms\n";
  return kExitOk;
}

int cmd_gen_dataset(const RunConfig& cfg, const Globals& g, const std::string& records_path,
                    const std::string& mode, std::ostream& out) {
  cfg.validate();
  forge::SeverityPlan plan = cfg.dataset.plan;
  if (!mode.empty()) {
    const auto m = forge::severity_mode_from_string(mode);
    if (m != plan.mode) plan = m == forge::SeverityMode::kScene ? forge::SeverityPlan::scene()
                                                              : forge::SeverityPlan::object();
  }
  const fs::path out_dir = g.out;
  const auto records = records_or_corpus(records_path, cfg, out_dir);
  const auto surrogate = encoder::DualEncoder::initialize(cfg.surrogate.seed, cfg.surrogate.dims);
  const auto generator = cfg.make_generator();
  forge::DatasetOptions options;
  options.attack = cfg.attack;
  options.n_chains = cfg.dataset.n_chains;
  options.plan_errors = cfg.chains.plan_errors;
  options.groups = cfg.groups();
  options.workers = cfg.dataset.workers;
  const auto result =
      forge::generate_dataset(surrogate, records, plan, options, *generator, out_dir);
  const json summary = {{"manifest", result.manifest_path.string()},
                        {"entries", result.entries.size()},
                        {"records", records.size()},
                        {"failures", result.failures},
                        {"config_digest", result.config_digest}};
  out << summary.dump(2) << '\n';
  return result.failures.empty() ? kExitOk : kExitRuntime;
}

int cmd_eval(const RunConfig& cfg, const Globals& g, const std::string& manifest_path,
             const std::string& defense, std::ostream& out) {
  cfg.validate();
  const auto spec = defense.empty() ? cfg.eval.defense : defense_from_string(defense);
  const auto victim =
      encoder::make_victim(cfg.victim.seed, cfg.surrogate.seed, cfg.victim.dims);
  const auto manifest = forge::read_manifest(manifest_path);
  const auto summary =
      eval_transfer(victim, manifest, cfg.groups().front(), spec, cfg.eval.workers);
  const auto j = to_json(summary);
  write_json(j, fs::path(g.out) / "eval.json");
  out << j.dump(2) << '\n';
  return summary.incomplete ? kExitRuntime : kExitOk;
}

int cmd_grad_check(const Globals& g, GradCheckOptions options, std::ostream& out) {
  if (g.seed) options.seed = *g.seed;
  const auto r = grad_check(options);
  out << "max rel. err " << r.max_rel_err << " over " << r.coords_checked
      << " coordinates (seed " << options.seed << ", h " << options.h << ")\n";
  constexpr double kTolerance = 1e-5;
  return r.max_rel_err < kTolerance ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Cascading adversarial attack toolkit", "cascade"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for the attack and the synthetic corpus");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  auto* synth = app.add_subcommand("synth-corpus", "Write the seeded synthetic corpus");
  auto* attack = app.add_subcommand("attack", "Run one attack and write report and images");
  std::string attack_records, attack_record;
  attack->add_option("--records", attack_records, "records.jsonl; synthetic corpus if omitted");
  attack->add_option("--record", attack_record, "Record id; first record if omitted");

  auto* gen = app.add_subcommand("gen-dataset", "Generate the severity-leveled dataset");
  std::string gen_records, gen_mode;
  gen->add_option("--records", gen_records, "records.jsonl; synthetic corpus if omitted");
  gen->add_option("--mode", gen_mode, "scene or object")->check(CLI::IsMember({"scene", "object"}));

  auto* eval = app.add_subcommand("eval", "Transfer evaluation on the victim encoder");
  std::string manifest_path, defense;
  eval->add_option("--manifest", manifest_path, "manifest.jsonl")->required();
  eval->add_option("--defense", defense, "none, bitred:<bits> or median:<window>");

  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of the objective");
  GradCheckOptions gopt;
  grad->add_option("--instances", gopt.instances)->capture_default_str();
  grad->add_option("--coords", gopt.coords_per_instance, "Coordinates per instance")
      ->capture_default_str();
  grad->add_option("--step", gopt.h, "Central-difference step h")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*grad) return cmd_grad_check(g, gopt, out);
    const RunConfig cfg = resolve_config(g);
    if (*synth) return cmd_synth(cfg, g, out);
    if (*attack) return cmd_attack(cfg, g, attack_records, attack_record, out);
    if (*gen) return cmd_gen_dataset(cfg, g, gen_records, gen_mode, out);
    if (*eval) return cmd_eval(cfg, g, manifest_path, defense, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace cascade::harness
