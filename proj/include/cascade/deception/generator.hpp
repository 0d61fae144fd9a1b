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

#ifndef CASCADE_DECEPTION_GENERATOR_HPP_
#define CASCADE_DECEPTION_GENERATOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "cascade/deception/chain.hpp"
#include "cascade/deception/template_bank.hpp"

namespace cascade::deception {

struct CauseResult {
  std::string text;
  bool used_fallback = false;
};

// Produces the cause of `effect` one stage earlier than `stage`.
class CauseGenerator {
 public:
  virtual ~CauseGenerator() = default;
  // Pre: stage.index > 1 (ConfigError otherwise).
  virtual CauseResult generate_cause(const std::string& scene_hint, const std::string& effect,
                                     Stage stage) const = 0;
  // Upper bound on concurrent generate_cause calls for query_aggregate.
  virtual std::size_t max_in_flight() const { return 1; }
};

// Pure lookup in a TemplateBank. The scene hint is ignored: a template
// cannot see the scene.
class TemplateGenerator final : public CauseGenerator {
 public:
  explicit TemplateGenerator(TemplateBank bank = TemplateBank::builtin())
      : bank_(std::move(bank)) {}

  CauseResult generate_cause(const std::string& scene_hint, const std::string& effect,
                             Stage stage) const override;
  const TemplateBank& bank() const { return bank_; }

 private:
  TemplateBank bank_;
};

struct GeneratorEndpoint {
  std::string base_url;  // e.g. http://127.0.0.1:8080/generate
  std::string auth_env = "CASCADE_GENERATOR_TOKEN";  // bearer token variable, may be unset
  int timeout_ms = 10000;
  int max_retries = 2;
  int backoff_ms = 100;  // doubled after every failed attempt
  std::size_t max_in_flight = 2;
};

// External text-generation service. Protocol: POST {"prompt": "..."} as
// JSON, expect {"text": "..."}. After `max_retries` failed retries the
// template bank answers instead and the result is flagged.
class EndpointGenerator final : public CauseGenerator {
 public:
  explicit EndpointGenerator(GeneratorEndpoint endpoint,
                             TemplateBank fallback = TemplateBank::builtin());

  CauseResult generate_cause(const std::string& scene_hint, const std::string& effect,
                             Stage stage) const override;
  std::size_t max_in_flight() const override { return endpoint_.max_in_flight; }
  const GeneratorEndpoint& endpoint() const { return endpoint_; }

  static std::string prompt(const std::string& scene_hint, const std::string& effect, Stage stage);

 private:
  CauseResult fallback(const std::string& effect, Stage stage) const;

  GeneratorEndpoint endpoint_;
  std::string host_;  // scheme://host:port
  std::string path_;
  TemplateBank bank_;
};

// Generates causes backward from `plan_error` and assembles them forward.
// Throws ConfigError unless 1 <= n_stages <= 3; template-mode errors
// propagate.
DeceptiveChain build_chain(const CauseGenerator& generator, const std::string& scene_hint,
                           const std::string& plan_error, std::size_t n_stages = kMaxStages);

struct ChainRequest {
  std::string scene_hint;
  std::vector<std::string> plan_errors;  // query j uses plan_errors[j % size]
  std::size_t n_stages = kMaxStages;
};

// k chains, built with at most generator.max_in_flight() concurrent
// workers. Output order follows query index.
std::vector<DeceptiveChain> query_aggregate(const CauseGenerator& generator,
                                            const ChainRequest& request, std::size_t k);

}  // namespace cascade::deception

#endif  // CASCADE_DECEPTION_GENERATOR_HPP_
