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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/deception/generator.hpp"
#include "cascade/error.hpp"
#include "cascade/forge/dataset.hpp"
#include "cascade/forge/image_io.hpp"
#include "cascade/forge/records.hpp"
#include "cascade/numcore/rng.hpp"

namespace fs = std::filesystem;
namespace nc = cascade::numcore;
namespace enc = cascade::encoder;
namespace fg = cascade::forge;
namespace opt = cascade::optimizer;
using nc::Tensor;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("cascade_forge_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Tensor random_frame(std::uint64_t seed, std::size_t h, std::size_t w) {
  nc::Rng rng(seed);
  auto t = Tensor::zeros({h, w, 3});
  for (auto& v : t.data()) v = rng.uniform();
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<fg::SceneRecord> small_corpus(const fs::path& dir, std::size_t count,
                                          fg::CorpusKind kind = fg::CorpusKind::kScene,
                                          std::size_t frames = 2) {
  nc::Rng rng(1);
  return fg::write_corpus(fg::synth_corpus(rng, count, 16, 16, frames, kind), dir);
}

fg::DatasetOptions fast_options() {
  fg::DatasetOptions o;
  o.attack.iterations = 4;
  o.n_chains = 2;
  o.groups.resize(2);
  return o;
}

}  // namespace

TEST(ImageIoTest, BlackAndWhiteAreExact) {
  TempDir dir;
  for (double v : {0.0, 1.0}) {
    const auto p = dir.path() / "flat.png";
    fg::save_png(Tensor::filled({4, 5, 3}, v), p);
    const auto back = fg::load_image(p);
    EXPECT_EQ(back.shape(), (nc::Shape{4, 5, 3}));
    for (double b : back.data()) EXPECT_EQ(b, v);
  }
}

TEST(ImageIoTest, RoundTripWithinHalfStep) {
  TempDir dir;
  const auto f = random_frame(3, 7, 9);
  fg::save_png(f, dir.path() / "r.png");
  const auto back = fg::load_image(dir.path() / "r.png");
  EXPECT_LE(max_abs_diff(f, back), 1.0 / 510 + 1e-12);
  EXPECT_EQ(back, fg::quantize(f));
}

TEST(ImageIoTest, ReadsBinaryPpm) {
  TempDir dir;
  const auto p = dir.path() / "img.ppm";
  {
    std::ofstream out(p, std::ios::binary);
    out << "P6\n# comment\n2 1\n255\n";
    const unsigned char px[] = {0, 51, 255, 255, 102, 0};
    out.write(reinterpret_cast<const char*>(px), sizeof px);
  }
  const auto t = fg::load_image(p);
  EXPECT_EQ(t.shape(), (nc::Shape{1, 2, 3}));
  EXPECT_EQ(t.storage(), (std::vector<double>{0.0, 0.2, 1.0, 1.0, 0.4, 0.0}));
}

TEST(ImageIoTest, ErrorsNameThePath) {
  TempDir dir;
  const auto missing = dir.path() / "nope.png";
  try {
    fg::load_image(missing);
    FAIL() << "expected IoError";
  } catch (const cascade::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.png"), std::string::npos);
  }
  const auto junk = dir.path() / "junk.png";
  std::ofstream(junk) << "definitely not an image";
  EXPECT_THROW(fg::load_image(junk), cascade::IoError);
  const auto short_ppm = dir.path() / "short.ppm";
  std::ofstream(short_ppm, std::ios::binary) << "P6 4 4 255\nabc";
  EXPECT_THROW(fg::load_image(short_ppm), cascade::IoError);
  // The parent "directory" is a regular file.
  EXPECT_THROW(fg::save_png(Tensor::zeros({2, 2, 3}), junk / "x.png"), cascade::IoError);
}

TEST(RecordsTest, JsonlRoundTrip) {
  TempDir dir;
  const std::vector<fg::SceneRecord> recs = {
      {"a", {"a0.png", "a1.png"}, "What should the car do?", "stop", "plan"},
      {"b", {"b0.png"}, "Is it safe?", "no", "perception"}};
  fg::write_records(recs, dir.path() / "r.jsonl");
  const auto back = fg::read_records(dir.path() / "r.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(fg::to_json(back[0]), fg::to_json(recs[0]));
  EXPECT_EQ(fg::to_json(back[1]), fg::to_json(recs[1]));
  std::ofstream(dir.path() / "bad.jsonl") << "{\"id\": 3}\n";
  EXPECT_THROW(fg::read_records(dir.path() / "bad.jsonl"), cascade::ConfigError);
}

TEST(SynthTest, DeterministicAndValid) {
  nc::Rng a(5), b(5);
  const auto ca = fg::synth_corpus(a, 6, 32, 24, 3);
  const auto cb = fg::synth_corpus(b, 6, 32, 24, 3);
  ASSERT_EQ(ca.size(), 6u);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    EXPECT_EQ(ca[i].frames.pixels(), cb[i].frames.pixels());
    EXPECT_EQ(ca[i].record.question, cb[i].record.question);
    EXPECT_EQ(ca[i].frames.frames(), 3u);
    EXPECT_FALSE(ca[i].record.answer.empty());
  }
  EXPECT_NE(ca[0].frames.pixels(), ca[1].frames.pixels());
  nc::Rng c(5);
  EXPECT_TRUE(fg::synth_corpus(c, 0, 32, 24, 1).empty());
}

TEST(SynthTest, RejectsBadDimensions) {
  nc::Rng rng(1);
  EXPECT_THROW(fg::synth_corpus(rng, 1, 30, 32, 1), cascade::ConfigError);
  EXPECT_THROW(fg::synth_corpus(rng, 1, 32, 32, 0), cascade::ConfigError);
}

TEST(SynthTest, WrittenCorpusLoadsAsQuantizedFrames) {
  TempDir dir;
  nc::Rng rng(2);
  const auto corpus = fg::synth_corpus(rng, 2, 16, 16, 2, fg::CorpusKind::kObject);
  const auto recs = fg::write_corpus(corpus, dir.path());
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(fg::read_records(dir.path() / "records.jsonl").size(), 2u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(fg::load_frames(recs[i]).pixels(), fg::quantize(corpus[i].frames.pixels()));
  }
}

TEST(SeverityPlanTest, DefaultsAndValidation) {
  EXPECT_EQ(fg::SeverityPlan::scene().levels, (std::vector<double>{0.02, 0.04, 0.06, 0.08}));
  EXPECT_EQ(fg::SeverityPlan::object().levels, (std::vector<double>{0.10, 0.15, 0.20, 0.25}));
  EXPECT_EQ(fg::SeverityPlan::object().semantics, opt::PatchSemantics::kSideLength);
  auto p = fg::SeverityPlan::scene();
  p.levels = {0.02, 0.02, 0.06, 0.08};
  EXPECT_THROW(p.validate(), cascade::ConfigError);
  p.levels = {0.02, 0.04, 0.06};
  EXPECT_THROW(p.validate(), cascade::ConfigError);
  auto o = fg::SeverityPlan::object();
  o.levels = {0.5, 0.8, 0.9, 1.2};
  EXPECT_THROW(o.validate(), cascade::ConfigError);
  const auto back = fg::severity_plan_from_json(fg::to_json(fg::SeverityPlan::object()));
  EXPECT_EQ(back.levels, fg::SeverityPlan::object().levels);
  EXPECT_EQ(back.mode, fg::SeverityMode::kObject);
}

TEST(SaveAdversarialTest, ZeroDeltaAndBound) {
  TempDir dir;
  nc::Rng rng(3);
  auto x = fg::synth_corpus(rng, 1, 16, 16, 2).front().frames;
  x = enc::ImageSeq(fg::quantize(x.pixels()));
  const std::vector<fs::path> paths = {dir.path() / "f0.png", dir.path() / "f1.png"};
  EXPECT_EQ(fg::save_adversarial(x, Tensor::zeros(x.pixels().shape()), paths), 0.0);

  auto delta = Tensor::zeros(x.pixels().shape());
  nc::Rng noise(4);
  for (auto& v : delta.data()) v = noise.uniform(-0.03, 0.03);
  delta = opt::project(delta, x, opt::LInfBall{0.03});
  const double q = fg::save_adversarial(x, delta, paths);
  EXPECT_LE(q, 0.03 + 1.0 / 510);
  EXPECT_GT(q, 0.02);
  EXPECT_THROW(fg::save_adversarial(x, delta, {paths[0]}), cascade::ConfigError);
}

TEST(ManifestTest, JsonRoundTrip) {
  fg::ManifestEntry e;
  e.record_id = "scene_0001";
  e.level = 2;
  e.severity = 0.15;
  e.image_paths = {"x.png"};
  e.config_digest = "abc";
  e.question = "q";
  e.answer = "a";
  e.task = "plan";
  e.quantized_linf = 0.5;
  e.delta_checksum = "00ff";
  e.regions = {{1, 2, 3, 3}};
  e.surrogate_seed = 42;
  EXPECT_EQ(fg::manifest_entry_from_json(fg::to_json(e)), e);
  auto bad = fg::to_json(e);
  bad.erase("surrogate_seed");
  EXPECT_THROW(fg::manifest_entry_from_json(bad), cascade::ConfigError);
}

TEST(GenerateDatasetTest, OneRecordGivesCleanPlusFourLevels) {
  TempDir dir;
  const auto recs = small_corpus(dir.path() / "corpus", 1);
  const auto surrogate = enc::DualEncoder::initialize(42);
  const cascade::deception::TemplateGenerator gen;
  const auto result = fg::generate_dataset(surrogate, recs, fg::SeverityPlan::scene(),
                                           fast_options(), gen, dir.path() / "out");
  ASSERT_EQ(result.entries.size(), 5u);
  EXPECT_TRUE(result.failures.empty());
  const std::vector<double> eps = {0.0, 0.02, 0.04, 0.06, 0.08};
  const auto clean = fg::load_frames(recs[0]);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& e = result.entries[k];
    EXPECT_EQ(e.level, k);
    EXPECT_EQ(e.severity, eps[k]);
    EXPECT_EQ(e.question, recs[0].question);
    EXPECT_EQ(e.config_digest, result.config_digest);
    EXPECT_EQ(e.surrogate_seed, 42u);
    ASSERT_EQ(e.image_paths.size(), 2u);
    for (std::size_t f = 0; f < 2; ++f) {
      const auto img = fg::load_image(e.image_paths[f]);
      EXPECT_LE(max_abs_diff(img, clean.frame(f)), eps[k] + 1.0 / 510);
    }
    if (k > 0) {
      EXPECT_LE(e.quantized_linf, eps[k] + 1.0 / 510);
    }
  }
  EXPECT_EQ(fg::read_manifest(result.manifest_path), result.entries);
}

TEST(GenerateDatasetTest, ObjectModeTouchesOnlyTheRegion) {
  TempDir dir;
  const auto recs = small_corpus(dir.path() / "corpus", 1, fg::CorpusKind::kObject, 1);
  auto plan = fg::SeverityPlan::object();
  const auto result =
      fg::generate_dataset(enc::DualEncoder::initialize(42), recs, plan, fast_options(),
                           cascade::deception::TemplateGenerator{}, dir.path() / "out");
  ASSERT_EQ(result.entries.size(), 5u);
  const auto clean = fg::load_frames(recs[0]).frame(0);
  const std::vector<std::size_t> sides = {2, 2, 3, 4};  // round(f * 16)
  for (std::size_t k = 1; k < 5; ++k) {
    const auto& e = result.entries[k];
    ASSERT_EQ(e.regions.size(), 1u);
    EXPECT_EQ(e.regions[0].height, sides[k - 1]);
    const auto img = fg::load_image(e.image_paths[0]);
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x)
        for (std::size_t c = 0; c < 3; ++c)
          if (!e.regions[0].contains(y, x)) {
            ASSERT_EQ(img[(y * 16 + x) * 3 + c], clean[(y * 16 + x) * 3 + c]);
          }
  }
}

TEST(GenerateDatasetTest, RejectsEmptyInputBeforeWriting) {
  TempDir dir;
  EXPECT_THROW(fg::generate_dataset(enc::DualEncoder::initialize(42), {},
                                    fg::SeverityPlan::scene(), fast_options(),
                                    cascade::deception::TemplateGenerator{}, dir.path() / "out"),
               cascade::ConfigError);
  EXPECT_FALSE(fs::exists(dir.path() / "out" / "manifest.jsonl"));
}

TEST(GenerateDatasetTest, FailedRecordIsSkippedAndReported) {
  TempDir dir;
  auto recs = small_corpus(dir.path() / "corpus", 2);
  recs[0].frame_paths[1] = (dir.path() / "missing.png").string();
  const auto result = fg::generate_dataset(enc::DualEncoder::initialize(42), recs,
                                           fg::SeverityPlan::scene(), fast_options(),
                                           cascade::deception::TemplateGenerator{},
                                           dir.path() / "out");
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_NE(result.failures[0].find(recs[0].id), std::string::npos);
  ASSERT_EQ(result.entries.size(), 5u);
  for (const auto& e : result.entries) EXPECT_EQ(e.record_id, recs[1].id);
}

TEST(GenerateDatasetTest, OutputIndependentOfWorkersAndSubset) {
  TempDir dir;
  const auto recs = small_corpus(dir.path() / "corpus", 4);
  const auto surrogate = enc::DualEncoder::initialize(42);
  const cascade::deception::TemplateGenerator gen;
  auto one = fast_options();
  auto many = fast_options();
  many.workers = 3;
  const auto a = fg::generate_dataset(surrogate, recs, fg::SeverityPlan::scene(), one, gen,
                                      dir.path() / "a");
  const auto b = fg::generate_dataset(surrogate, recs, fg::SeverityPlan::scene(), many, gen,
                                      dir.path() / "b");
  auto manifest_a = slurp(a.manifest_path);
  auto manifest_b = slurp(b.manifest_path);
  // Paths differ only by the output directory.
  for (std::size_t pos; (pos = manifest_b.find(dir.path() / "b")) != std::string::npos;)
    manifest_b.replace(pos, (dir.path() / "b").string().size(), (dir.path() / "a").string());
  EXPECT_EQ(manifest_a, manifest_b);
  EXPECT_EQ(slurp(a.entries[7].image_paths[1]), slurp(b.entries[7].image_paths[1]));

  const auto sub = fg::generate_dataset(surrogate, {recs[2]}, fg::SeverityPlan::scene(), one,
                                        gen, dir.path() / "c");
  for (std::size_t k = 0; k < 5; ++k)
    EXPECT_EQ(sub.entries[k].delta_checksum, a.entries[10 + k].delta_checksum);
}

TEST(GenerateDatasetTest, DigestTracksConfiguration) {
  const auto surrogate = enc::DualEncoder::initialize(42);
  const auto base = fg::config_digest(surrogate, fg::SeverityPlan::scene(), fast_options(), "g");
  EXPECT_EQ(base, fg::config_digest(surrogate, fg::SeverityPlan::scene(), fast_options(), "g"));
  auto opts = fast_options();
  opts.attack.iterations = 5;
  EXPECT_NE(base, fg::config_digest(surrogate, fg::SeverityPlan::scene(), opts, "g"));
  EXPECT_NE(base, fg::config_digest(surrogate, fg::SeverityPlan::object(), fast_options(), "g"));
  EXPECT_NE(base, fg::config_digest(surrogate, fg::SeverityPlan::scene(), fast_options(), "h"));
  EXPECT_NE(base, fg::config_digest(enc::DualEncoder::initialize(43), fg::SeverityPlan::scene(),
                                    fast_options(), "g"));
}
