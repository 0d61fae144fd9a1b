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

#include <array>
#include <cmath>
#include <fstream>

#include "cascade/error.hpp"
#include "cascade/forge/image_io.hpp"
#include "cascade/forge/records.hpp"

namespace cascade::forge {

using numcore::Rng;

nlohmann::json to_json(const SceneRecord& r) {
  return {{"id", r.id},
          {"frames", r.frame_paths},
          {"question", r.question},
          {"answer", r.answer},
          {"task", r.task}};
}

SceneRecord scene_record_from_json(const nlohmann::json& j) {
  try {
    return {j.at("id").get<std::string>(), j.at("frames").get<std::vector<std::string>>(),
            j.at("question").get<std::string>(), j.at("answer").get<std::string>(),
            j.value("task", std::string())};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene record: ") + e.what());
  }
}

void write_records(const std::vector<SceneRecord>& records, const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<SceneRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<SceneRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(scene_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

encoder::ImageSeq load_frames(const SceneRecord& record) {
  if (record.frame_paths.empty()) throw IoError("record " + record.id + " has no frames");
  std::vector<numcore::Tensor> frames;
  for (const auto& p : record.frame_paths) frames.push_back(load_image(p));
  return encoder::ImageSeq::from_frames(frames);
}

namespace {

using Color = std::array<double, 3>;

class Canvas {
 public:
  Canvas(std::size_t h, std::size_t w) : h_(h), w_(w), px_(h * w * 3, 0.0) {}

  void set(long y, long x, const Color& c) {
    if (y < 0 || x < 0 || y >= static_cast<long>(h_) || x >= static_cast<long>(w_)) return;
    const auto i = (static_cast<std::size_t>(y) * w_ + static_cast<std::size_t>(x)) * 3;
    for (int k = 0; k < 3; ++k) px_[i + k] = c[k];
  }

  void vertical_gradient(long y0, long y1, const Color& top, const Color& bottom) {
    for (long y = y0; y < y1; ++y) {
      const double t = (y1 - y0 > 1) ? static_cast<double>(y - y0) / (y1 - y0 - 1) : 0.0;
      Color c;
      for (int k = 0; k < 3; ++k) c[k] = top[k] + t * (bottom[k] - top[k]);
      for (long x = 0; x < static_cast<long>(w_); ++x) set(y, x, c);
    }
  }

  void rect(long y, long x, long hh, long ww, const Color& c) {
    for (long dy = 0; dy < hh; ++dy) {
      for (long dx = 0; dx < ww; ++dx) set(y + dy, x + dx, c);
    }
  }

  void disc(double cy, double cx, double r, const Color& c) {
    for (long y = static_cast<long>(cy - r) - 1; y <= static_cast<long>(cy + r) + 1; ++y) {
      for (long x = static_cast<long>(cx - r) - 1; x <= static_cast<long>(cx + r) + 1; ++x) {
        const double dy = y + 0.5 - cy, dx = x + 0.5 - cx;
        if (dy * dy + dx * dx <= r * r) set(y, x, c);
      }
    }
  }

  // Regular polygon with `sides` vertices, first vertex rotated by `phase`.
  void polygon(double cy, double cx, double r, int sides, double phase, const Color& c) {
    std::vector<std::array<double, 2>> v(static_cast<std::size_t>(sides));
    for (int i = 0; i < sides; ++i) {
      const double a = phase + 2.0 * M_PI * i / sides;
      v[static_cast<std::size_t>(i)] = {cy + r * std::sin(a), cx + r * std::cos(a)};
    }
    for (long y = static_cast<long>(cy - r) - 1; y <= static_cast<long>(cy + r) + 1; ++y) {
      for (long x = static_cast<long>(cx - r) - 1; x <= static_cast<long>(cx + r) + 1; ++x) {
        const double py = y + 0.5, px = x + 0.5;
        bool inside = true;
        for (std::size_t i = 0; i < v.size() && inside; ++i) {
          const auto& a = v[i];
          const auto& b = v[(i + 1) % v.size()];
          const double cross = (b[1] - a[1]) * (py - a[0]) - (b[0] - a[0]) * (px - a[1]);
          inside = cross >= 0.0;
        }
        if (inside) set(y, x, c);
      }
    }
  }

  numcore::Tensor frame() const { return numcore::Tensor({h_, w_, 3}, px_); }

 private:
  std::size_t h_, w_;
  std::vector<double> px_;
};

Color random_color(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

const Color kRed = {0.85, 0.1, 0.1};
const Color kGreen = {0.1, 0.75, 0.2};
const Color kWhite = {0.95, 0.95, 0.95};
const Color kDark = {0.12, 0.12, 0.12};

struct Vehicle {
  double y, x, h, w, vx;
  Color color;
};

SyntheticScene road_scene(Rng& rng, std::size_t index, std::size_t h, std::size_t w,
                          std::size_t n_frames) {
  const auto H = static_cast<double>(h), W = static_cast<double>(w);
  const Color sky_top = random_color(rng, 0.35, 0.75);
  const Color sky_bottom = random_color(rng, 0.6, 0.95);
  const Color ground = random_color(rng, 0.2, 0.5);
  const Color road = {0.3, 0.3, 0.32};
  const double horizon = H * rng.uniform(0.35, 0.5);
  const int light = static_cast<int>(rng.below(3));  // 0 none, 1 red, 2 green
  const double light_x = W * rng.uniform(0.1, 0.9);

  std::vector<Vehicle> vehicles(1 + rng.below(3));
  for (auto& v : vehicles) {
    v.h = H * rng.uniform(0.1, 0.2);
    v.w = W * rng.uniform(0.12, 0.25);
    v.y = rng.uniform(horizon, H - v.h);
    v.x = rng.uniform(0.0, W - v.w);
    v.vx = rng.uniform(-2.0, 2.0);
    v.color = random_color(rng);
  }

  std::vector<numcore::Tensor> frames;
  for (std::size_t f = 0; f < n_frames; ++f) {
    Canvas c(h, w);
    c.vertical_gradient(0, static_cast<long>(horizon), sky_top, sky_bottom);
    c.vertical_gradient(static_cast<long>(horizon), static_cast<long>(h), ground, ground);
    // Road narrowing toward the horizon.
    for (long y = static_cast<long>(horizon); y < static_cast<long>(h); ++y) {
      const double t = (y - horizon) / (H - horizon);
      const double half = W * (0.08 + 0.4 * t);
      for (long x = static_cast<long>(W / 2 - half); x < static_cast<long>(W / 2 + half); ++x) {
        c.set(y, x, road);
      }
      if ((y / 3) % 2 == 0) c.set(y, static_cast<long>(W / 2), kWhite);
    }
    if (light != 0) {
      const double lh = H * 0.18, lw = W * 0.07;
      const double ly = std::max(1.0, horizon - lh - H * 0.05);
      c.rect(static_cast<long>(ly), static_cast<long>(light_x), static_cast<long>(lh),
             static_cast<long>(lw), kDark);
      c.disc(ly + (light == 1 ? lh * 0.25 : lh * 0.75), light_x + lw / 2, lw * 0.4,
             light == 1 ? kRed : kGreen);
    }
    for (const auto& v : vehicles) {
      const double x = v.x + v.vx * static_cast<double>(f);
      c.rect(static_cast<long>(v.y), static_cast<long>(x), static_cast<long>(v.h),
             static_cast<long>(v.w), v.color);
      c.rect(static_cast<long>(v.y + v.h * 0.15), static_cast<long>(x + v.w * 0.15),
             static_cast<long>(v.h * 0.3), static_cast<long>(v.w * 0.7), kDark);
    }
    frames.push_back(c.frame());
  }

  SceneRecord r;
  r.id = "scene_" + std::to_string(index);
  switch (rng.below(4)) {
    case 0:
      r.task = "scene-description";
      r.question = "How many vehicles are visible in the scene?";
      r.answer = std::to_string(vehicles.size());
      break;
    case 1:
      r.task = "traffic-object-recognition";
      r.question = "What is the state of the traffic light?";
      r.answer = light == 0 ? "there is no traffic light" : (light == 1 ? "red" : "green");
      break;
    case 2:
      r.task = "motion-prediction";
      r.question = "Which way is the nearest vehicle moving?";
      {
        const auto& nearest = *std::max_element(
            vehicles.begin(), vehicles.end(),
            [](const Vehicle& a, const Vehicle& b) { return a.y + a.h < b.y + b.h; });
        r.answer = nearest.vx < 0 ? "left" : "right";
      }
      break;
    default:
      r.task = "decision-planning";
      r.question = "Should the ego vehicle stop or proceed?";
      r.answer = light == 1 ? "stop" : "proceed with caution";
      break;
  }
  return {std::move(r), encoder::ImageSeq::from_frames(frames)};
}

SyntheticScene sign_scene(Rng& rng, std::size_t index, std::size_t h, std::size_t w,
                          std::size_t n_frames) {
  const auto H = static_cast<double>(h), W = static_cast<double>(w);
  const Color top = random_color(rng, 0.3, 0.9);
  const Color bottom = random_color(rng, 0.2, 0.7);
  const int kind = static_cast<int>(rng.below(4));
  const double r = std::min(H, W) * rng.uniform(0.22, 0.35);
  const double cy = rng.uniform(r + 1, H - r - 1);
  const double cx = rng.uniform(r + 1, W - r - 1);
  const double drift = rng.uniform(-1.0, 1.0);

  std::vector<numcore::Tensor> frames;
  for (std::size_t f = 0; f < n_frames; ++f) {
    Canvas c(h, w);
    c.vertical_gradient(0, static_cast<long>(h), top, bottom);
    const double x = cx + drift * static_cast<double>(f);
    c.rect(static_cast<long>(cy), static_cast<long>(x - r * 0.08), static_cast<long>(H),
           static_cast<long>(std::max(1.0, r * 0.16)), kDark);  // post
    switch (kind) {
      case 0:  // stop: red octagon with a white bar
        c.polygon(cy, x, r, 8, M_PI / 8, kRed);
        c.rect(static_cast<long>(cy - r * 0.15), static_cast<long>(x - r * 0.6),
               static_cast<long>(r * 0.3), static_cast<long>(r * 1.2), kWhite);
        break;
      case 1:  // yield: inverted red triangle with white inside
        c.polygon(cy, x, r, 3, M_PI / 2, kRed);
        c.polygon(cy - r * 0.1, x, r * 0.55, 3, M_PI / 2, kWhite);
        break;
      case 2:  // speed limit: white disc with red ring
        c.disc(cy, x, r, kRed);
        c.disc(cy, x, r * 0.75, kWhite);
        c.rect(static_cast<long>(cy - r * 0.3), static_cast<long>(x - r * 0.35),
               static_cast<long>(r * 0.6), static_cast<long>(r * 0.2), kDark);
        break;
      default:  // proceed: green disc with white arrow shaft
        c.disc(cy, x, r, kGreen);
        c.rect(static_cast<long>(cy - r * 0.5), static_cast<long>(x - r * 0.1),
               static_cast<long>(r), static_cast<long>(r * 0.2), kWhite);
        break;
    }
    frames.push_back(c.frame());
  }

  static constexpr std::array<const char*, 4> kActions = {
      "come to a complete stop", "yield to crossing traffic", "slow down to the posted limit",
      "proceed straight ahead"};
  SceneRecord rec;
  rec.id = "sign_" + std::to_string(index);
  rec.task = "sign-action";
  rec.question = "What action should the vehicle take given the sign?";
  rec.answer = kActions[static_cast<std::size_t>(kind)];
  return {std::move(rec), encoder::ImageSeq::from_frames(frames)};
}

}  // namespace

std::vector<SyntheticScene> synth_corpus(Rng& rng, std::size_t count, std::size_t height,
                                         std::size_t width, std::size_t n_frames,
                                         CorpusKind kind, std::size_t patch_size) {
  if (patch_size == 0 || height == 0 || width == 0 || height % patch_size != 0 ||
      width % patch_size != 0) {
    throw ConfigError("synth_corpus: " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not a positive multiple of patch size " + std::to_string(patch_size));
  }
  if (n_frames == 0) throw ConfigError("synth_corpus: n_frames must be >= 1");
  std::vector<SyntheticScene> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng scene_rng = rng.split(i);
    out.push_back(kind == CorpusKind::kScene ? road_scene(scene_rng, i, height, width, n_frames)
                                             : sign_scene(scene_rng, i, height, width, n_frames));
  }
  rng.next_u64();  // advance so a second call yields a different corpus
  return out;
}

std::vector<SceneRecord> write_corpus(const std::vector<SyntheticScene>& corpus,
                                      const std::filesystem::path& out_dir) {
  std::vector<SceneRecord> records;
  for (const auto& scene : corpus) {
    SceneRecord r = scene.record;
    r.frame_paths.clear();
    for (std::size_t f = 0; f < scene.frames.frames(); ++f) {
      const auto path = out_dir / "clean" / (r.id + "_frame_" + std::to_string(f) + ".png");
      save_png(scene.frames.frame(f), path);
      r.frame_paths.push_back(path.string());
    }
    records.push_back(std::move(r));
  }
  write_records(records, out_dir / "records.jsonl");
  return records;
}

}  // namespace cascade::forge
