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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/error.hpp"
#include "cascade/forge/dataset.hpp"
#include "cascade/forge/image_io.hpp"
#include "cascade/harness/cli.hpp"
#include "cascade/harness/config.hpp"
#include "cascade/harness/defense.hpp"
#include "cascade/harness/eval.hpp"
#include "cascade/harness/grad_check.hpp"
#include "cascade/numcore/rng.hpp"

namespace fs = std::filesystem;
namespace nc = cascade::numcore;
namespace enc = cascade::encoder;
namespace fg = cascade::forge;
namespace hn = cascade::harness;
using nc::Tensor;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("cascade_harness_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cascade");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = hn::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Tensor frame_from(std::size_t h, std::size_t w, std::vector<double> gray) {
  auto t = Tensor::zeros({h, w, 3});
  for (std::size_t i = 0; i < h * w; ++i)
    for (std::size_t c = 0; c < 3; ++c) t[i * 3 + c] = gray[i];
  return t;
}

// A small corpus whose "adversarial" levels are copies of the clean frames.
std::vector<fg::ManifestEntry> identity_manifest(const fs::path& dir, std::size_t records) {
  nc::Rng rng(3);
  const auto recs = fg::write_corpus(fg::synth_corpus(rng, records, 16, 16, 2), dir);
  std::vector<fg::ManifestEntry> m;
  for (const auto& r : recs) {
    for (std::size_t level = 0; level <= fg::kAdversarialLevels; ++level) {
      fg::ManifestEntry e;
      e.record_id = r.id;
      e.level = level;
      e.severity = 0.02 * static_cast<double>(level);
      e.image_paths = r.frame_paths;
      e.question = r.question;
      e.answer = r.answer;
      e.task = r.task;
      e.surrogate_seed = 42;
      m.push_back(e);
    }
  }
  return m;
}

}  // namespace

TEST(BitRedTest, Anchors) {
  const auto one = hn::bit_depth_reduce(frame_from(1, 2, {0.4, 0.6}), 1);
  EXPECT_EQ(one[0], 0.0);
  EXPECT_EQ(one[3], 1.0);
  const auto three = hn::bit_depth_reduce(frame_from(1, 1, {0.5}), 3);
  EXPECT_NEAR(three[0], 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(three[0], 0.571429, 1e-6);
}

TEST(BitRedTest, FixedPointsAndIdempotence) {
  nc::Rng rng(1);
  auto f = Tensor::zeros({6, 6, 3});
  for (auto& v : f.data()) v = rng.uniform();
  for (int bits = 1; bits <= 7; ++bits) {
    const auto ends = hn::bit_depth_reduce(frame_from(1, 2, {0.0, 1.0}), bits);
    EXPECT_EQ(ends[0], 0.0);
    EXPECT_EQ(ends[3], 1.0);
    const auto once = hn::bit_depth_reduce(f, bits);
    EXPECT_EQ(hn::bit_depth_reduce(once, bits), once) << bits;
  }
  EXPECT_THROW(hn::bit_depth_reduce(f, 0), cascade::ConfigError);
  EXPECT_THROW(hn::bit_depth_reduce(f, 8), cascade::ConfigError);
}

TEST(MedianTest, Anchors) {
  const auto row = hn::median_smooth(frame_from(1, 5, {0, 0, 1, 0, 0}), 3);
  for (double v : row.data()) EXPECT_EQ(v, 0.0);

  std::vector<double> dark(25, 0.1);
  dark[12] = 0.9;
  const auto spot = hn::median_smooth(frame_from(5, 5, dark), 3);
  for (double v : spot.data()) EXPECT_EQ(v, 0.1);

  const auto flat = frame_from(4, 3, std::vector<double>(12, 0.3));
  EXPECT_EQ(hn::median_smooth(flat, 3), flat);
  EXPECT_EQ(hn::median_smooth(flat, 5), flat);
}

TEST(MedianTest, ReplicatePaddingAtEdges) {
  // Column 0 sees {1, 1, 0} after padding: the edge value survives.
  const auto r = hn::median_smooth(frame_from(1, 3, {1, 0, 0}), 3);
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[3], 0.0);
}

TEST(MedianTest, RejectsEvenOrSmallWindows) {
  const auto f = frame_from(3, 3, std::vector<double>(9, 0.5));
  EXPECT_THROW(hn::median_smooth(f, 4), cascade::ConfigError);
  EXPECT_THROW(hn::median_smooth(f, 1), cascade::ConfigError);
}

TEST(DefenseSpecTest, StringRoundTrip) {
  for (const char* s : {"none", "bitred:3", "median:5"}) {
    EXPECT_EQ(hn::to_string(hn::defense_from_string(s)), s);
  }
  EXPECT_THROW(hn::defense_from_string("blur:3"), cascade::ConfigError);
  EXPECT_THROW(hn::defense_from_string("bitred:x"), cascade::ConfigError);
  EXPECT_THROW(hn::defense_from_string("median:2"), cascade::ConfigError);
}

TEST(EvalTest, MarginIsReferenceMinusBestOther) {
  const cascade::objectives::MatchResult m{Tensor({1, 3}, {0.5, 0.2, 0.3})};
  EXPECT_DOUBLE_EQ(hn::margin(m, 0, 0), 0.2);
  EXPECT_DOUBLE_EQ(hn::margin(m, 0, 1), -0.3);
}

TEST(EvalTest, IdentityManifestHasNoFlips) {
  TempDir dir;
  const auto m = identity_manifest(dir.path(), 3);
  const auto victim = enc::make_victim(7, 42);
  for (const auto& d : {hn::DefenseSpec{hn::NoDefense{}}, hn::DefenseSpec{hn::BitRed{3}},
                        hn::DefenseSpec{hn::MedianSmooth{3}}}) {
    const auto s = hn::eval_transfer(victim, m, cascade::objectives::safety_descriptors(), d, 2);
    EXPECT_FALSE(s.incomplete);
    EXPECT_EQ(s.corpus_size, 3u);
    EXPECT_EQ(s.adversarial_entries, 12u);
    EXPECT_EQ(s.outcome.frames, 24u);
    EXPECT_EQ(s.flip_rate, 0.0);
    EXPECT_EQ(s.mean_margin_drop, 0.0);
    EXPECT_EQ(s.per_level.size(), 4u);
  }
}

TEST(EvalTest, RecomputationIsIdentical) {
  TempDir dir;
  const auto m = identity_manifest(dir.path(), 2);
  const auto victim = enc::make_victim(7, 42);
  const auto d = cascade::objectives::safety_descriptors();
  EXPECT_EQ(hn::to_json(hn::eval_transfer(victim, m, d, hn::NoDefense{}, 1)).dump(),
            hn::to_json(hn::eval_transfer(victim, m, d, hn::NoDefense{}, 3)).dump());
}

TEST(EvalTest, RejectsVictimWithSurrogateSeed) {
  TempDir dir;
  auto m = identity_manifest(dir.path(), 1);
  m[2].surrogate_seed = 7;
  EXPECT_THROW(hn::eval_transfer(enc::make_victim(7, 42), m,
                                 cascade::objectives::safety_descriptors(), hn::NoDefense{}),
               cascade::ConfigError);
}

TEST(EvalTest, MissingImagesMarkIncomplete) {
  TempDir dir;
  auto m = identity_manifest(dir.path(), 2);
  m[3].image_paths[0] = (dir.path() / "gone.png").string();
  m.erase(m.begin() + 5);  // clean entry of the second record
  const auto s = hn::eval_transfer(enc::make_victim(7, 42), m,
                                   cascade::objectives::safety_descriptors(), hn::NoDefense{});
  EXPECT_TRUE(s.incomplete);
  EXPECT_EQ(s.errors.size(), 5u);
  EXPECT_EQ(s.adversarial_entries, 8u);
  EXPECT_EQ(s.outcome.frames, 6u);
}

TEST(EvalTest, RandomSignDeltaIsFeasibleCorner) {
  nc::Rng rng(4);
  auto px = Tensor::zeros({1, 8, 8, 3});
  for (auto& v : px.data()) v = rng.uniform();
  const enc::ImageSeq x(px);
  const auto d = hn::random_sign_delta(x, 0.05, rng);
  std::size_t corners = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    ASSERT_LE(std::abs(d[i]), 0.05);
    ASSERT_GE(px[i] + d[i], 0.0);
    ASSERT_LE(px[i] + d[i], 1.0);
    corners += std::abs(d[i]) == 0.05;
  }
  EXPECT_GT(corners, d.size() * 8 / 10);
}

TEST(ConfigTest, EmptyObjectIsDefaults) {
  const auto cfg = hn::run_config_from_json(nlohmann::json::object());
  EXPECT_EQ(cfg.surrogate.seed, 42u);
  EXPECT_EQ(cfg.victim.seed, 7u);
  EXPECT_EQ(cfg.attack.iterations, 160u);
  EXPECT_EQ(cfg.corpus.count, 32u);
  EXPECT_EQ(cfg.corpus.height, 64u);
  EXPECT_EQ(cfg.corpus.frames, 2u);
  EXPECT_EQ(hn::to_json(hn::run_config_from_json(hn::to_json(cfg))), hn::to_json(cfg));
}

TEST(ConfigTest, UnknownKeysNameTheirPath) {
  try {
    hn::run_config_from_json({{"corpus", {{"cuont", 3}}}});
    FAIL() << "expected ConfigError";
  } catch (const cascade::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("corpus.cuont"), std::string::npos) << e.what();
  }
  for (const auto& [bad, path] : std::vector<std::pair<nlohmann::json, std::string>>{
           {{{"atack", nlohmann::json::object()}}, "'atack'"},
           {{{"attack", {{"bogus", 1}}}}, "attack.bogus"},
           {{{"chains", {{"endpoint", {{"url", "http://x/"}, {"tls", true}}}}}}, "chains.endpoint.tls"}}) {
    try {
      hn::run_config_from_json(bad);
      ADD_FAILURE() << bad.dump();
    } catch (const cascade::ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(path), std::string::npos) << e.what();
    }
  }
}

TEST(ConfigTest, CrossFieldValidation) {
  auto cfg = hn::run_config_from_json({{"victim", {{"seed", 42}}}});
  EXPECT_THROW(cfg.validate(), cascade::ConfigError);
  cfg = hn::run_config_from_json({{"eval", {{"defense", "median:3"}}}});
  EXPECT_NO_THROW(cfg.validate());
}

TEST(GradCheckTest, PassesWithinTolerance) {
  hn::GradCheckOptions o;
  o.instances = 2;
  o.coords_per_instance = 15;
  const auto r = hn::grad_check(o);
  EXPECT_EQ(r.coords_checked, 30u);
  EXPECT_LT(r.max_rel_err, 1e-5);
  EXPECT_NEAR(hn::relative_error(2.0, 1.0), 0.5, 1e-15);
  EXPECT_EQ(hn::relative_error(0.0, 1e-12), 1e-12 / 1e-8);
}

TEST(CliTest, GradCheckExitsZero) {
  const auto r = cli({"grad-check", "--seed", "7"});
  EXPECT_EQ(r.code, hn::kExitOk) << r.err;
  EXPECT_NE(r.out.find("max rel. err"), std::string::npos);
}

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({"frobnicate"}).code, hn::kExitUsage);
  EXPECT_EQ(cli({}).code, hn::kExitUsage);
  EXPECT_EQ(cli({"eval"}).code, hn::kExitUsage);
  EXPECT_EQ(cli({"--config", "/nonexistent/cfg.json", "grad-check"}).code, hn::kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, hn::kExitOk);
}

TEST(CliTest, ZeroIterationsExitsOneNamingPrecondition) {
  TempDir dir;
  const auto cfg = dir.path() / "cfg.json";
  std::ofstream(cfg) << R"({"attack": {"iterations": 0}})";
  const auto r = cli({"--config", cfg.string(), "--out", (dir.path() / "out").string(), "attack"});
  EXPECT_EQ(r.code, hn::kExitRuntime);
  EXPECT_NE(r.err.find("iterations"), std::string::npos) << r.err;
}

TEST(CliTest, BadConfigExitsOne) {
  TempDir dir;
  const auto cfg = dir.path() / "cfg.json";
  std::ofstream(cfg) << R"({"attack": {"epsilon": 0.1, "bogus": 1}})";
  const auto r = cli({"--config", cfg.string(), "synth-corpus"});
  EXPECT_EQ(r.code, hn::kExitRuntime);
  EXPECT_NE(r.err.find("bogus"), std::string::npos) << r.err;
}

TEST(CliTest, EvalOnIdentityManifestReportsZeroFlips) {
  TempDir dir;
  fg::write_manifest(identity_manifest(dir.path() / "corpus", 2), dir.path() / "manifest.jsonl");
  const auto r = cli({"--out", (dir.path() / "out").string(), "eval", "--manifest",
                      (dir.path() / "manifest.jsonl").string()});
  ASSERT_EQ(r.code, hn::kExitOk) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir.path() / "out" / "eval.json"));
  EXPECT_EQ(j.at("flip_rate").get<double>(), 0.0);
}

TEST(CliTest, SmallPipelineRuns) {
  TempDir dir;
  const auto cfg = dir.path() / "cfg.json";
  std::ofstream(cfg) << R"({"attack": {"iterations": 3},
                           "corpus": {"count": 2, "height": 16, "width": 16},
                           "dataset": {"n_chains": 2}})";
  const auto out = (dir.path() / "out").string();
  auto r = cli({"--config", cfg.string(), "--out", out, "attack"});
  ASSERT_EQ(r.code, hn::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "report.json"));
  r = cli({"--config", cfg.string(), "--out", out, "gen-dataset"});
  ASSERT_EQ(r.code, hn::kExitOk) << r.err;
  EXPECT_EQ(fg::read_manifest(dir.path() / "out" / "manifest.jsonl").size(), 10u);
  r = cli({"--config", cfg.string(), "--out", out, "eval", "--manifest",
           (dir.path() / "out" / "manifest.jsonl").string(), "--defense", "bitred:3"});
  ASSERT_EQ(r.code, hn::kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir.path() / "out" / "eval.json")).at("defense"),
            "bitred:3");
}
