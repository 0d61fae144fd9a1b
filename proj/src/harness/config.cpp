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

#include "cascade/harness/config.hpp"

#include <fstream>
#include <set>

#include "cascade/error.hpp"

namespace cascade::harness {

namespace {

using nlohmann::json;

// `where` is the dotted path of `j`; empty at the top level.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError((where.empty() ? "config" : where) + ": expected a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

std::set<std::string> keys_of(const json& j) {
  std::set<std::string> keys;
  for (const auto& [key, _] : j.items()) keys.insert(key);
  return keys;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json encoder_json(const EncoderConfig& e) {
  return {{"seed", e.seed},
          {"patch_size", e.dims.patch_size},
          {"hidden", e.dims.hidden},
          {"embed", e.dims.embed}};
}

EncoderConfig encoder_from_json(const json& j, EncoderConfig e, const std::string& where) {
  check_keys(j, {"seed", "patch_size", "hidden", "embed"}, where);
  read(j, "seed", e.seed);
  read(j, "patch_size", e.dims.patch_size);
  read(j, "hidden", e.dims.hidden);
  read(j, "embed", e.dims.embed);
  if (e.dims.patch_size == 0 || e.dims.hidden == 0 || e.dims.embed == 0) {
    throw ConfigError(where + ": dimensions must be >= 1");
  }
  return e;
}

json endpoint_json(const deception::GeneratorEndpoint& e) {
  return {{"url", e.base_url},         {"auth_env", e.auth_env},
          {"timeout_ms", e.timeout_ms}, {"max_retries", e.max_retries},
          {"backoff_ms", e.backoff_ms}, {"max_in_flight", e.max_in_flight}};
}

deception::GeneratorEndpoint endpoint_from_json(const json& j) {
  check_keys(j, {"url", "auth_env", "timeout_ms", "max_retries", "backoff_ms", "max_in_flight"},
             "chains.endpoint");
  deception::GeneratorEndpoint e;
  e.base_url = j.at("url").get<std::string>();
  read(j, "auth_env", e.auth_env);
  read(j, "timeout_ms", e.timeout_ms);
  read(j, "max_retries", e.max_retries);
  read(j, "backoff_ms", e.backoff_ms);
  read(j, "max_in_flight", e.max_in_flight);
  return e;
}

std::string semantics_name(optimizer::PatchSemantics s) {
  return s == optimizer::PatchSemantics::kArea ? "area" : "side";
}

optimizer::PatchSemantics semantics_from(const std::string& s) {
  if (s == "area") return optimizer::PatchSemantics::kArea;
  if (s == "side") return optimizer::PatchSemantics::kSideLength;
  throw ConfigError("patch.semantics: expected 'side' or 'area', got '" + s + "'");
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void RunConfig::validate() const {
  attack.validate(patch.has_value());
  if (victim.seed == surrogate.seed) {
    throw ConfigError("config: victim seed " + std::to_string(victim.seed) +
                      " must differ from surrogate seed");
  }
  if (chains.k == 0) throw ConfigError("config: chains.k must be >= 1");
  if (chains.n_stages < 1 || chains.n_stages > deception::kMaxStages) {
    throw ConfigError("config: chains.n_stages must be in [1,3]");
  }
  if (chains.plan_errors.empty()) throw ConfigError("config: chains.plan_errors is empty");
  if (patch && !(patch->fraction > 0.0 && patch->fraction <= 1.0)) {
    throw ConfigError("config: patch.fraction must be in (0,1]");
  }
  if (corpus.frames == 0) throw ConfigError("config: corpus.frames must be >= 1");
  dataset.plan.validate();
  if (dataset.n_chains == 0) throw ConfigError("config: dataset.n_chains must be >= 1");
  harness::validate(eval.defense);
}

std::vector<objectives::DescriptorSet> RunConfig::groups() const {
  return descriptor_groups ? objectives::load_descriptor_groups(*descriptor_groups)
                           : objectives::builtin_descriptor_groups();
}

std::unique_ptr<deception::CauseGenerator> RunConfig::make_generator() const {
  auto bank = chains.template_bank ? deception::TemplateBank::load(*chains.template_bank)
                                   : deception::TemplateBank::builtin();
  if (chains.endpoint) {
    return std::make_unique<deception::EndpointGenerator>(*chains.endpoint, std::move(bank));
  }
  return std::make_unique<deception::TemplateGenerator>(std::move(bank));
}

json to_json(const RunConfig& cfg) {
  json chains = {{"k", cfg.chains.k},
                 {"n_stages", cfg.chains.n_stages},
                 {"plan_errors", cfg.chains.plan_errors},
                 {"template_bank", optional_json(cfg.chains.template_bank)},
                 {"endpoint", cfg.chains.endpoint ? endpoint_json(*cfg.chains.endpoint)
                                                  : json(nullptr)}};
  json patch = nullptr;
  if (cfg.patch) {
    patch = {{"fraction", cfg.patch->fraction}, {"semantics", semantics_name(cfg.patch->semantics)}};
  }
  return {{"attack", optimizer::to_json(cfg.attack)},
          {"surrogate", encoder_json(cfg.surrogate)},
          {"victim", encoder_json(cfg.victim)},
          {"chains", chains},
          {"descriptor_groups", optional_json(cfg.descriptor_groups)},
          {"patch", patch},
          {"corpus",
           {{"count", cfg.corpus.count},
            {"height", cfg.corpus.height},
            {"width", cfg.corpus.width},
            {"frames", cfg.corpus.frames},
            {"kind", cfg.corpus.kind == forge::CorpusKind::kScene ? "scene" : "object"},
            {"seed", cfg.corpus.seed}}},
          {"dataset",
           {{"plan", forge::to_json(cfg.dataset.plan)},
            {"n_chains", cfg.dataset.n_chains},
            {"workers", cfg.dataset.workers}}},
          {"eval", {{"defense", to_string(cfg.eval.defense)}, {"workers", cfg.eval.workers}}}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  try {
    check_keys(j, {"attack", "surrogate", "victim", "chains", "descriptor_groups", "patch",
                   "corpus", "dataset", "eval"},
               "");
    if (j.contains("attack")) {
      check_keys(j.at("attack"), keys_of(optimizer::to_json(optimizer::AttackConfig{})), "attack");
      cfg.attack = optimizer::attack_config_from_json(j.at("attack"));
    }
    if (j.contains("surrogate")) {
      cfg.surrogate = encoder_from_json(j.at("surrogate"), cfg.surrogate, "surrogate");
    }
    if (j.contains("victim")) cfg.victim = encoder_from_json(j.at("victim"), cfg.victim, "victim");
    if (j.contains("chains")) {
      const auto& c = j.at("chains");
      check_keys(c, {"k", "n_stages", "plan_errors", "template_bank", "endpoint"}, "chains");
      read(c, "k", cfg.chains.k);
      read(c, "n_stages", cfg.chains.n_stages);
      read(c, "plan_errors", cfg.chains.plan_errors);
      if (c.contains("template_bank") && !c.at("template_bank").is_null()) {
        cfg.chains.template_bank = c.at("template_bank").get<std::string>();
      }
      if (c.contains("endpoint") && !c.at("endpoint").is_null()) {
        cfg.chains.endpoint = endpoint_from_json(c.at("endpoint"));
      }
    }
    if (j.contains("descriptor_groups") && !j.at("descriptor_groups").is_null()) {
      cfg.descriptor_groups = j.at("descriptor_groups").get<std::string>();
    }
    if (j.contains("patch") && !j.at("patch").is_null()) {
      const auto& p = j.at("patch");
      check_keys(p, {"fraction", "semantics"}, "patch");
      PatchConfig pc;
      read(p, "fraction", pc.fraction);
      if (p.contains("semantics")) pc.semantics = semantics_from(p.at("semantics").get<std::string>());
      cfg.patch = pc;
    }
    if (j.contains("corpus")) {
      const auto& c = j.at("corpus");
      check_keys(c, {"count", "height", "width", "frames", "kind", "seed"}, "corpus");
      read(c, "count", cfg.corpus.count);
      read(c, "height", cfg.corpus.height);
      read(c, "width", cfg.corpus.width);
      read(c, "frames", cfg.corpus.frames);
      read(c, "seed", cfg.corpus.seed);
      if (c.contains("kind")) {
        const auto kind = c.at("kind").get<std::string>();
        if (kind == "scene") {
          cfg.corpus.kind = forge::CorpusKind::kScene;
        } else if (kind == "object") {
          cfg.corpus.kind = forge::CorpusKind::kObject;
        } else {
          throw ConfigError("corpus.kind: expected 'scene' or 'object', got '" + kind + "'");
        }
      }
    }
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      check_keys(d, {"plan", "n_chains", "workers"}, "dataset");
      if (d.contains("plan")) cfg.dataset.plan = forge::severity_plan_from_json(d.at("plan"));
      read(d, "n_chains", cfg.dataset.n_chains);
      read(d, "workers", cfg.dataset.workers);
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      check_keys(e, {"defense", "workers"}, "eval");
      if (e.contains("defense")) cfg.eval.defense = defense_from_string(e.at("defense").get<std::string>());
      read(e, "workers", cfg.eval.workers);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace cascade::harness
