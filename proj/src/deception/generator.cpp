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

#include "cascade/deception/generator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "cascade/error.hpp"
#include "httplib.h"

namespace cascade::deception {

namespace {

StageLabel preceding(Stage stage) {
  if (stage.index <= 1 || stage.label == StageLabel::kPerception) {
    throw ConfigError("generate_cause: stage " + std::string(to_string(stage.label)) + " (index " +
                      std::to_string(stage.index) + ") has no preceding stage");
  }
  return stage.label == StageLabel::kPlan ? StageLabel::kPrediction : StageLabel::kPerception;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

CauseResult TemplateGenerator::generate_cause(const std::string&, const std::string& effect,
                                              Stage stage) const {
  const auto cause_label = preceding(stage);
  const auto category = bank_.category_of(stage.label, effect);
  if (!category) {
    std::string known;
    for (const auto& c : bank_.categories()) known += (known.empty() ? "" : ", ") + c;
    throw ConfigError("generate_cause: unknown error category for " +
                      std::string(to_string(stage.label)) + " text '" + effect +
                      "'; known categories: " + known);
  }
  return {bank_.text_at(*category, cause_label), false};
}

EndpointGenerator::EndpointGenerator(GeneratorEndpoint endpoint, TemplateBank fallback)
    : endpoint_(std::move(endpoint)), bank_(std::move(fallback)) {
  const auto& url = endpoint_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint: base_url '" + url + "' lacks a scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (endpoint_.max_in_flight == 0) throw ConfigError("endpoint: max_in_flight must be >= 1");
  if (endpoint_.max_retries < 0) throw ConfigError("endpoint: max_retries must be >= 0");
}

std::string EndpointGenerator::prompt(const std::string& scene_hint, const std::string& effect,
                                      Stage stage) {
  const auto cause_label = preceding(stage);
  return "You are analysing the reasoning chain of an autonomous driving system.\n"
         "Scene: " + scene_hint + "\n"
         "At the " + std::string(to_string(stage.label)) + " stage the system concluded: \"" +
         effect + "\".\n"
         "Reply with one short clause stating the " + std::string(to_string(cause_label)) +
         " result that would directly cause this conclusion.";
}

CauseResult EndpointGenerator::generate_cause(const std::string& scene_hint,
                                              const std::string& effect, Stage stage) const {
  const auto body = nlohmann::json{{"prompt", prompt(scene_hint, effect, stage)}}.dump();

  httplib::Client client(host_);
  const auto timeout = std::chrono::milliseconds(endpoint_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (const char* token = std::getenv(endpoint_.auth_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  auto backoff = std::chrono::milliseconds(endpoint_.backoff_ms);
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res || res->status != 200) continue;
    auto reply = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) continue;
    auto text = trim(reply["text"].get<std::string>());
    if (text.empty()) continue;
    return {std::move(text), false};
  }
  return fallback(effect, stage);
}

CauseResult EndpointGenerator::fallback(const std::string& effect, Stage stage) const {
  const auto cause_label = preceding(stage);
  if (auto category = bank_.category_of(stage.label, effect)) {
    return {bank_.text_at(*category, cause_label), true};
  }
  return {bank_.fallback_text(cause_label), true};
}

DeceptiveChain build_chain(const CauseGenerator& generator, const std::string& scene_hint,
                           const std::string& plan_error, std::size_t n_stages) {
  if (plan_error.empty()) throw ConfigError("build_chain: empty plan error");
  DeceptiveChain chain;
  chain.parts.resize(n_stages);
  chain.parts[n_stages - 1] = {stage_at(n_stages, n_stages), plan_error};
  for (std::size_t pos = n_stages; pos > 1; --pos) {
    const auto& effect = chain.parts[pos - 1];
    auto cause = generator.generate_cause(scene_hint, effect.text, effect.stage);
    chain.used_fallback = chain.used_fallback || cause.used_fallback;
    chain.parts[pos - 2] = {stage_at(pos - 1, n_stages), std::move(cause.text)};
  }
  chain.combined = join_parts(chain.parts);
  return chain;
}

std::vector<DeceptiveChain> query_aggregate(const CauseGenerator& generator,
                                            const ChainRequest& request, std::size_t k) {
  if (k == 0) throw ConfigError("query_aggregate: k must be >= 1");
  if (request.plan_errors.empty()) throw ConfigError("query_aggregate: no plan errors");

  std::vector<DeceptiveChain> out(k);
  auto run = [&](std::size_t j) {
    out[j] = build_chain(generator, request.scene_hint,
                         request.plan_errors[j % request.plan_errors.size()], request.n_stages);
  };
  const auto workers = std::min(k, std::max<std::size_t>(1, generator.max_in_flight()));
  if (workers == 1) {
    for (std::size_t j = 0; j < k; ++j) run(j);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto j = next++; j < k; j = next++) {
          try {
            run(j);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace cascade::deception
