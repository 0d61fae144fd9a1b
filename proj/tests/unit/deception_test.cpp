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

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "cascade/deception/generator.hpp"
#include "cascade/error.hpp"
#include "httplib.h"

namespace dc = cascade::deception;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

// Local stand-in for a text-generation service.
class MockEndpoint {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit MockEndpoint(Handler handler) {
    server_.Post("/generate", [this, handler](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      int seen = max_in_flight_.load();
      while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
      }
      ++requests_;
      handler(req, res);
      --in_flight_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }

  dc::GeneratorEndpoint endpoint() const {
    dc::GeneratorEndpoint e;
    e.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/generate";
    e.timeout_ms = 2000;
    e.backoff_ms = 1;
    return e;
  }
  int requests() const { return requests_; }
  int max_in_flight() const { return max_in_flight_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

void reply(httplib::Response& res, const std::string& text) {
  res.set_content(nlohmann::json{{"text", text}}.dump(), "application/json");
}

const dc::Stage kPlan = dc::stage_at(3, 3);
const dc::Stage kPrediction = dc::stage_at(2, 3);

}  // namespace

TEST(ChainTest, StageMapping) {
  EXPECT_EQ(dc::stage_at(1, 3).label, dc::StageLabel::kPerception);
  EXPECT_EQ(dc::stage_at(3, 3).label, dc::StageLabel::kPlan);
  EXPECT_EQ(dc::stage_at(1, 2).label, dc::StageLabel::kPrediction);
  EXPECT_EQ(dc::stage_at(1, 1).label, dc::StageLabel::kPlan);
  EXPECT_THROW(dc::stage_at(0, 3), cascade::ConfigError);
  EXPECT_THROW(dc::stage_at(2, 1), cascade::ConfigError);
  EXPECT_THROW(dc::stage_at(1, 4), cascade::ConfigError);
}

TEST(ChainTest, JoinRejectsEmptyParts) {
  EXPECT_THROW(dc::join_parts({}), cascade::ConfigError);
  EXPECT_THROW(dc::join_parts({{dc::stage_at(1, 1), ""}}), cascade::ConfigError);
}

TEST(TemplateBankTest, AssetMatchesBuiltin) {
  const auto asset = read_json(std::string(CASCADE_ASSET_DIR) + "/template_bank.json");
  EXPECT_EQ(asset, dc::TemplateBank::builtin().to_json());
  EXPECT_EQ(dc::TemplateBank::from_json(asset).to_json(), asset);
}

TEST(TemplateBankTest, RejectsMalformedBanks) {
  auto j = dc::TemplateBank::builtin().to_json();
  auto dup = j;
  dup["seed_errors"].push_back(dup["seed_errors"][0]);
  EXPECT_THROW(dc::TemplateBank::from_json(dup), cascade::ConfigError);
  auto empty_text = j;
  empty_text["seed_errors"][0]["plan"] = "";
  EXPECT_THROW(dc::TemplateBank::from_json(empty_text), cascade::ConfigError);
  auto bad_version = j;
  bad_version["version"] = 99;
  EXPECT_THROW(dc::TemplateBank::from_json(bad_version), cascade::ConfigError);
}

TEST(TemplateGeneratorTest, WalksBackwardThroughStages) {
  const dc::TemplateGenerator gen;
  const auto pred = gen.generate_cause("", "accelerate through the intersection", kPlan);
  EXPECT_EQ(pred.text, "the signal is predicted to remain green");
  EXPECT_FALSE(pred.used_fallback);
  const auto perc = gen.generate_cause("", pred.text, kPrediction);
  EXPECT_EQ(perc.text, "the traffic light ahead shows green");
  EXPECT_EQ(gen.generate_cause("", pred.text, kPrediction).text, perc.text);
}

TEST(TemplateGeneratorTest, UnknownTextListsCategories) {
  const dc::TemplateGenerator gen;
  try {
    gen.generate_cause("", "do a barrel roll", kPlan);
    FAIL() << "expected ConfigError";
  } catch (const cascade::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run-red-light"), std::string::npos);
  }
  EXPECT_THROW(gen.generate_cause("", "accelerate through the intersection", dc::stage_at(1, 3)),
               cascade::ConfigError);
}

TEST(BuildChainTest, SingleStageIsThePlan) {
  const dc::TemplateGenerator gen;
  const auto c = dc::build_chain(gen, "", "tailgate text is free here", 1);
  EXPECT_EQ(c.combined, "tailgate text is free here");
}

TEST(BuildChainTest, ThreeStagesJoinedInOrder) {
  const dc::TemplateGenerator gen;
  const auto c = dc::build_chain(gen, "", "accelerate through the intersection");
  ASSERT_EQ(c.parts.size(), 3u);
  EXPECT_EQ(c.combined, c.parts[0].text + ", therefore " + c.parts[1].text + ", therefore " +
                            c.parts[2].text);
  EXPECT_EQ(c.parts[0].stage.label, dc::StageLabel::kPerception);
  EXPECT_EQ(c.parts[2].text, "accelerate through the intersection");
}

TEST(BuildChainTest, CatalogChainsMatchGolden) {
  const auto golden = read_json(std::string(CASCADE_GOLDEN_DIR) + "/chains.json");
  const dc::TemplateGenerator gen;
  const auto& bank = gen.bank();
  ASSERT_EQ(golden.size(), bank.seed_errors().size());
  for (const auto& s : bank.seed_errors()) {
    EXPECT_EQ(dc::build_chain(gen, "", s.plan).combined, golden.at(s.category).get<std::string>())
        << s.category;
  }
}

TEST(QueryAggregateTest, SingletonEqualsBuildChain) {
  const dc::TemplateGenerator gen;
  const auto chains = dc::query_aggregate(gen, {"", {"tailgate"}, 1}, 1);
  ASSERT_EQ(chains.size(), 1u);
  EXPECT_EQ(chains[0].combined, dc::build_chain(gen, "", "tailgate", 1).combined);
  EXPECT_THROW(dc::query_aggregate(gen, {"", {"tailgate"}, 1}, 0), cascade::ConfigError);
}

TEST(QueryAggregateTest, FiveDistinctSeedsGiveFiveDistinctChains) {
  const dc::TemplateGenerator gen;
  std::vector<std::string> plans;
  for (const auto& s : gen.bank().seed_errors()) plans.push_back(s.plan);
  plans.resize(5);
  const auto chains = dc::query_aggregate(gen, {"", plans, 3}, 5);
  std::set<std::string> distinct;
  for (const auto& c : chains) distinct.insert(c.combined);
  EXPECT_EQ(distinct.size(), 5u);
}

TEST(EndpointTest, ReturnsTrimmedServiceText) {
  MockEndpoint mock([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    EXPECT_NE(body.at("prompt").get<std::string>().find("a rainy junction"), std::string::npos);
    reply(res, "  the sensor saw a green arrow \n");
  });
  const dc::EndpointGenerator gen(mock.endpoint());
  const auto r = gen.generate_cause("a rainy junction", "turn left now", kPlan);
  EXPECT_EQ(r.text, "the sensor saw a green arrow");
  EXPECT_FALSE(r.used_fallback);
}

TEST(EndpointTest, SendsBearerTokenFromEnvironment) {
  std::string seen;
  MockEndpoint mock([&](const httplib::Request& req, httplib::Response& res) {
    seen = req.get_header_value("Authorization");
    reply(res, "ok");
  });
  auto ep = mock.endpoint();
  ep.auth_env = "CASCADE_TEST_GENERATOR_TOKEN";
  ::setenv(ep.auth_env.c_str(), "s3cret", 1);
  dc::EndpointGenerator(ep).generate_cause("", "x", kPlan);
  ::unsetenv(ep.auth_env.c_str());
  EXPECT_EQ(seen, "Bearer s3cret");
}

TEST(EndpointTest, FallsBackToBankAfterRetries) {
  MockEndpoint mock([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  auto ep = mock.endpoint();
  ep.max_retries = 2;
  const dc::EndpointGenerator gen(ep);
  const auto r = gen.generate_cause("", "accelerate through the intersection", kPlan);
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.text, "the signal is predicted to remain green");
  EXPECT_EQ(mock.requests(), 3);
}

TEST(EndpointTest, MalformedRepliesFallBackToGenericText) {
  MockEndpoint mock([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"txt\": 1}", "application/json");
  });
  auto ep = mock.endpoint();
  ep.max_retries = 1;
  const auto r = dc::EndpointGenerator(ep).generate_cause("", "free text plan", kPlan);
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.text, dc::TemplateBank::builtin().fallback_text(dc::StageLabel::kPrediction));
}

TEST(EndpointTest, UnreachableServiceFallsBack) {
  dc::GeneratorEndpoint ep;
  ep.base_url = "http://127.0.0.1:1/generate";
  ep.timeout_ms = 200;
  ep.max_retries = 0;
  const auto chain = dc::build_chain(dc::EndpointGenerator(ep), "", "close the gap to the lead vehicle");
  EXPECT_TRUE(chain.used_fallback);
  EXPECT_EQ(chain.combined, read_json(std::string(CASCADE_GOLDEN_DIR) + "/chains.json")
                                .at("tailgate")
                                .get<std::string>());
}

TEST(EndpointTest, BoundsConcurrentRequests) {
  MockEndpoint mock([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    reply(res, "cause");
  });
  auto ep = mock.endpoint();
  ep.max_in_flight = 2;
  const dc::EndpointGenerator gen(ep);
  const auto chains = dc::query_aggregate(gen, {"", {"a", "b", "c"}, 3}, 6);
  EXPECT_EQ(chains.size(), 6u);
  EXPECT_EQ(mock.requests(), 12);
  EXPECT_LE(mock.max_in_flight(), 2);
  EXPECT_EQ(chains[1].parts.back().text, "b");
}

TEST(EndpointTest, RejectsBadConfiguration) {
  dc::GeneratorEndpoint ep;
  ep.base_url = "127.0.0.1/generate";
  EXPECT_THROW(dc::EndpointGenerator{ep}, cascade::ConfigError);
  ep.base_url = "http://127.0.0.1/generate";
  ep.max_in_flight = 0;
  EXPECT_THROW(dc::EndpointGenerator{ep}, cascade::ConfigError);
}
