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

#include "cascade/objectives/objectives.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "cascade/error.hpp"
#include "cascade/numcore/ops.hpp"
#include "json.hpp"

namespace cascade::objectives {

namespace nc = numcore;
using encoder::DualEncoder;
using encoder::ImageSeq;

void DescriptorSet::validate() const {
  if (descriptors.size() < 2) {
    throw ConfigError("descriptor group '" + group_id + "' needs at least two descriptors");
  }
  std::set<std::string> seen;
  for (const auto& d : descriptors) {
    if (!seen.insert(d).second) {
      throw ConfigError("descriptor group '" + group_id + "' repeats '" + d + "'");
    }
  }
}

DescriptorSet safety_descriptors() {
  return {"safety", {"A safe driving scenario", "An unsafe driving scenario"}};
}

std::vector<DescriptorSet> builtin_descriptor_groups() {
  return {
      safety_descriptors(),
      {"road", {"A clear road ahead", "An obstructed road ahead"}},
      {"action", {"The vehicle may proceed", "The vehicle must stop"}},
      {"traffic", {"Normal traffic conditions", "Hazardous traffic conditions"}},
      {"pedestrian", {"No pedestrian is at risk", "A pedestrian is at risk"}},
  };
}

std::vector<DescriptorSet> load_descriptor_groups(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("descriptor groups: cannot open " + path.string());
  std::vector<DescriptorSet> out;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& g : j.at("groups")) {
      out.push_back({g.at("id").get<std::string>(),
                     g.at("descriptors").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("descriptor groups: " + path.string() + ": " + e.what());
  }
  if (out.empty()) throw ConfigError("descriptor groups: " + path.string() + " has no groups");
  for (const auto& g : out) g.validate();
  return out;
}

std::size_t MatchResult::argmax(std::size_t row) const {
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes(); ++c) {
    if (p.at(row, c) > p.at(row, best)) best = c;
  }
  return best;
}

void LossWeights::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0) throw ConfigError("loss weights must be >= 0");
  if (alpha == 0 && beta == 0 && gamma == 0) throw ConfigError("loss weights are all zero");
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_sim: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_sim: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Var cosine(Var a, Var b) {
  auto denom = nc::mul(nc::l2_norm(a), nc::l2_norm(b));
  if (denom.value()[0] == 0.0) throw DomainError("cosine: zero vector");
  return nc::div_scalar(nc::sum(nc::mul(a, b)), denom);
}

namespace {

Tensor transpose(const Tensor& t) {
  const auto r = t.dim(0), c = t.dim(1);
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = t.at(i, j);
  }
  return Tensor::unchecked({c, r}, std::move(out));
}

Tensor row(const Tensor& flat) { return Tensor::unchecked({1, flat.size()}, flat.storage()); }

Tensor descriptor_embeddings(const DualEncoder& enc, const DescriptorSet& d) {
  d.validate();
  std::vector<double> data;
  for (const auto& text : d.descriptors) {
    auto e = enc.encode_text(encoder::tokenize(text));
    data.insert(data.end(), e.data().begin(), e.data().end());
  }
  return Tensor::unchecked({d.descriptors.size(), enc.dims().embed}, std::move(data));
}

void check_delta(const ImageSeq& x, const Tensor& delta) {
  if (delta.shape() != x.pixels().shape()) {
    throw ShapeError("objective: delta shape " + nc::shape_string(delta.shape()) +
                     " does not match images " + nc::shape_string(x.pixels().shape()));
  }
}

}  // namespace

Var matching_probs(Var frame_embeddings, const Tensor& descriptor_embeddings) {
  auto& tape = frame_embeddings.tape();
  auto sims = nc::matmul(frame_embeddings, tape.constant(transpose(descriptor_embeddings)));
  return nc::softmax_rows(sims);
}

MatchResult match_from_cosines(const Tensor& cosines) {
  nc::Tape tape;
  return {nc::softmax_rows(tape.constant(cosines)).value()};
}

MatchResult matching_head(const DualEncoder& enc, const ImageSeq& x,
                          const DescriptorSet& descriptors) {
  nc::Tape tape;
  auto frames = enc.encode_frames(tape.constant(x.pixels()));
  return {matching_probs(frames, descriptor_embeddings(enc, descriptors)).value()};
}

Mask build_mask(const MatchResult& p_clean) {
  auto m = Tensor::zeros(p_clean.p.shape());
  for (std::size_t r = 0; r < p_clean.frames(); ++r) {
    std::size_t lowest = 0;
    for (std::size_t c = 1; c < p_clean.classes(); ++c) {
      if (p_clean.p.at(r, c) < p_clean.p.at(r, lowest)) lowest = c;
    }
    m.at(r, lowest) = 1.0;
  }
  return {std::move(m)};
}

Var loss_high_term(Var probs, const Mask& mask) {
  if (probs.shape() != mask.m.shape()) {
    throw ShapeError("loss_high: probabilities " + nc::shape_string(probs.shape()) +
                     " vs mask " + nc::shape_string(mask.m.shape()));
  }
  // M*(-log p) + (1-M)*log p == (1 - 2M) * log p
  auto sign = mask.m;
  for (auto& v : sign.data()) v = 1.0 - 2.0 * v;
  return nc::mean(nc::mul(nc::log(probs), probs.tape().constant(std::move(sign))));
}

double loss_high(const MatchResult& p_adv, const Mask& mask) {
  nc::Tape tape;
  return loss_high_term(tape.constant(p_adv.p), mask).value().item();
}

double loss_low(const DualEncoder& enc, const ImageSeq& x, const Tensor& delta,
                const std::vector<deception::DeceptiveChain>& chains) {
  if (chains.empty()) throw ConfigError("loss_low: empty chain list");
  check_delta(x, delta);
  nc::Tape tape;
  auto adv = nc::add(tape.constant(x.pixels()), tape.constant(delta));
  auto s = encoder::sequence_embedding(enc.encode_frames(adv));
  double acc = 0.0;
  for (const auto& c : chains) {
    auto t = tape.constant(row(enc.encode_text(encoder::tokenize(c.combined))));
    acc += 1.0 - cosine(s, t).value().item();
  }
  return acc / static_cast<double>(chains.size());
}

double loss_disc(const DualEncoder& enc, const ImageSeq& x, const Tensor& delta) {
  check_delta(x, delta);
  nc::Tape tape;
  auto clean = tape.constant(row(enc.encode_sequence(x)));
  auto adv = nc::add(tape.constant(x.pixels()), tape.constant(delta));
  return cosine(encoder::sequence_embedding(enc.encode_frames(adv)), clean).value().item();
}

LossBreakdown combine(double l_low, double l_high, double l_disc, const LossWeights& w) {
  return {l_low, l_high, l_disc, w.alpha * l_low + w.beta * l_high + w.gamma * l_disc};
}

AttackObjective::AttackObjective(const DualEncoder& enc, ImageSeq clean,
                                 const std::vector<deception::DeceptiveChain>& chains,
                                 std::vector<DescriptorSet> groups, LossWeights weights)
    : enc_(&enc), clean_(std::move(clean)), groups_(std::move(groups)), weights_(weights) {
  weights_.validate();
  if (chains.empty()) throw ConfigError("objective: empty chain list");
  if (groups_.empty()) throw ConfigError("objective: no descriptor groups");
  clean_embedding_ = row(enc.encode_sequence(clean_));
  for (const auto& c : chains) {
    chain_embeddings_.push_back(row(enc.encode_text(encoder::tokenize(c.combined))));
  }
  nc::Tape tape;
  auto frames = enc.encode_frames(tape.constant(clean_.pixels()));
  for (const auto& g : groups_) {
    group_embeddings_.push_back(descriptor_embeddings(enc, g));
    clean_matches_.push_back({matching_probs(frames, group_embeddings_.back()).value()});
    masks_.push_back(build_mask(clean_matches_.back()));
  }
}

AttackObjective::Terms AttackObjective::record(Var delta) const {
  check_delta(clean_, delta.value());
  auto& tape = delta.tape();
  auto adv = nc::add(tape.constant(clean_.pixels()), delta);
  auto frames = enc_->encode_frames(adv);
  auto seq = encoder::sequence_embedding(frames);

  Var cos_sum = cosine(seq, tape.constant(chain_embeddings_[0]));
  for (std::size_t i = 1; i < chain_embeddings_.size(); ++i) {
    cos_sum = nc::add(cos_sum, cosine(seq, tape.constant(chain_embeddings_[i])));
  }
  auto low = nc::add_scalar(
      nc::scale(cos_sum, -1.0 / static_cast<double>(chain_embeddings_.size())), 1.0);

  Var high = loss_high_term(matching_probs(frames, group_embeddings_[0]), masks_[0]);
  for (std::size_t g = 1; g < groups_.size(); ++g) {
    high = nc::add(high, loss_high_term(matching_probs(frames, group_embeddings_[g]), masks_[g]));
  }
  if (groups_.size() > 1) high = nc::scale(high, 1.0 / static_cast<double>(groups_.size()));

  auto disc = cosine(seq, tape.constant(clean_embedding_));
  auto total = nc::add(nc::add(nc::scale(low, weights_.alpha), nc::scale(high, weights_.beta)),
                       nc::scale(disc, weights_.gamma));
  return {low, high, disc, total};
}

namespace {

LossBreakdown breakdown(const AttackObjective::Terms& t) {
  return {t.low.value().item(), t.high.value().item(), t.disc.value().item(),
          t.total.value().item()};
}

}  // namespace

LossBreakdown AttackObjective::evaluate(const Tensor& delta) const {
  nc::Tape tape;
  return breakdown(record(tape.constant(delta)));
}

std::pair<LossBreakdown, Tensor> AttackObjective::evaluate_with_gradient(
    const Tensor& delta) const {
  nc::Tape tape;
  auto d = tape.leaf(delta, true);
  auto terms = record(d);
  auto grads = tape.backward(terms.total);
  return {breakdown(terms), grads.of(d)};
}

MatchResult AttackObjective::match(const Tensor& delta, std::size_t g) const {
  check_delta(clean_, delta);
  nc::Tape tape;
  auto adv = nc::add(tape.constant(clean_.pixels()), tape.constant(delta));
  return {matching_probs(enc_->encode_frames(adv), group_embeddings_.at(g)).value()};
}

}  // namespace cascade::objectives
