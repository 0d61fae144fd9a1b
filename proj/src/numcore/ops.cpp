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

#include "cascade/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cascade/error.hpp"

namespace cascade::numcore {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                   shape_string(b));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const std::string& want) {
  throw ShapeError(std::string(op) + ": shape " + shape_string(a) + " is not " + want);
}

void same_tape(const char* op, Var a, Var b) {
  if (&a.tape() != &b.tape()) throw Error(std::string(op) + ": operands on different tapes");
}

void require_rank2(const char* op, const Shape& s) {
  if (s.size() != 2) shape_error(op, s, "rank 2");
}

bool wants(const Tape& tape, std::size_t id) { return tape.requires_grad(id); }

void accumulate(Tensor& into, const Tensor& from) {
  auto dst = into.data();
  auto src = from.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// out[m,n] += a[m,k] * b[k,n]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
}

// out[m,k] += g[m,n] * b[k,n]^T
void gemm_nt(std::span<const double> g, std::span<const double> b, std::span<double> out,
             std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b.data() + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      out[i * k + p] += acc;
    }
  }
}

// out[k,n] += a[m,k]^T * g[m,n]
void gemm_tn(std::span<const double> a, std::span<const double> g, std::span<double> out,
             std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* orow = out.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * grow[j];
    }
  }
}

template <class Fwd, class Deriv>
Var unary(const char*, Var a, Fwd fwd, Deriv deriv) {
  const auto& x = a.value();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  return a.tape().record(
      Tensor::unchecked(x.shape(), std::move(out)), {a.id()},
      [deriv](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        const auto& xv = tape.value(in);
        const auto& yv = tape.value(self);
        auto dst = grads[in].data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * deriv(xv[i], yv[i]);
      });
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape("matmul", a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    shape_error("matmul", av.shape(), bv.shape());
  }
  const auto m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  std::vector<double> out(m * n, 0.0);
  gemm_nn(av.data(), bv.data(), out, m, k, n);
  return a.tape().record(
      Tensor::unchecked({m, n}, std::move(out)), {a.id(), b.id()},
      [m, k, n](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto ia = tape.inputs(self)[0];
        const auto ib = tape.inputs(self)[1];
        if (wants(tape, ia)) gemm_nt(g.data(), tape.value(ib).data(), grads[ia].data(), m, n, k);
        if (wants(tape, ib)) gemm_tn(tape.value(ia).data(), g.data(), grads[ib].data(), m, k, n);
      });
}

namespace {

template <class Combine, class Back>
Var binary_same_shape(const char* op, Var a, Var b, Combine combine, Back back) {
  same_tape(op, a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.shape() != bv.shape()) shape_error(op, av.shape(), bv.shape());
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = combine(av[i], bv[i]);
  return a.tape().record(Tensor::unchecked(av.shape(), std::move(out)), {a.id(), b.id()}, back);
}

}  // namespace

Var add(Var a, Var b) {
  return binary_same_shape(
      "add", a, b, [](double x, double y) { return x + y; },
      [](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        for (auto in : tape.inputs(self)) {
          if (wants(tape, in)) accumulate(grads[in], g);
        }
      });
}

Var sub(Var a, Var b) {
  return binary_same_shape(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto ia = tape.inputs(self)[0];
        const auto ib = tape.inputs(self)[1];
        if (wants(tape, ia)) accumulate(grads[ia], g);
        if (wants(tape, ib)) {
          auto dst = grads[ib].data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= g[i];
        }
      });
}

Var mul(Var a, Var b) {
  return binary_same_shape(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto ia = tape.inputs(self)[0];
        const auto ib = tape.inputs(self)[1];
        const auto& av = tape.value(ia);
        const auto& bv = tape.value(ib);
        if (wants(tape, ia)) {
          auto dst = grads[ia].data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * bv[i];
        }
        if (wants(tape, ib)) {
          auto dst = grads[ib].data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * av[i];
        }
      });
}

Var neg(Var a) {
  return unary("neg", a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var add_row(Var a, Var bias_row) {
  same_tape("add_row", a, bias_row);
  const auto& av = a.value();
  const auto& bv = bias_row.value();
  require_rank2("add_row", av.shape());
  const auto rows = av.dim(0), cols = av.dim(1);
  if (bv.size() != cols || (bv.rank() == 2 && bv.dim(0) != 1) || bv.rank() > 2) {
    shape_error("add_row", av.shape(), bv.shape());
  }
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = av[r * cols + c] + bv[c];
  }
  return a.tape().record(
      Tensor::unchecked(av.shape(), std::move(out)), {a.id(), bias_row.id()},
      [rows, cols](const Tape& tape, std::size_t self, const Tensor& g,
                   std::vector<Tensor>& grads) {
        const auto ia = tape.inputs(self)[0];
        const auto ib = tape.inputs(self)[1];
        if (wants(tape, ia)) accumulate(grads[ia], g);
        if (wants(tape, ib)) {
          auto dst = grads[ib].data();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) dst[c] += g[r * cols + c];
          }
        }
      });
}

Var scale(Var a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double offset) {
  return unary(
      "add_scalar", a, [offset](double x) { return x + offset; },
      [](double, double) { return 1.0; });
}

Var div_scalar(Var a, Var s) {
  same_tape("div_scalar", a, s);
  const auto& av = a.value();
  if (s.value().size() != 1) shape_error("div_scalar", av.shape(), s.value().shape());
  const double denom = s.value()[0];
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / denom;
  return a.tape().record(
      Tensor::unchecked(av.shape(), std::move(out)), {a.id(), s.id()},
      [](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto ia = tape.inputs(self)[0];
        const auto is = tape.inputs(self)[1];
        const double d = tape.value(is)[0];
        if (wants(tape, ia)) {
          auto dst = grads[ia].data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] / d;
        }
        if (wants(tape, is)) {
          // d(a/s)/ds = -a/s^2 = -y/s
          const auto& y = tape.value(self);
          double acc = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) acc += g[i] * y[i];
          grads[is].data()[0] -= acc / d;
        }
      });
}

Var tanh(Var a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var log(Var a) {
  const auto& av = a.value();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!(av[i] > 0.0)) {
      throw DomainError("log: non-positive input " + std::to_string(av[i]) + " at flat index " +
                        std::to_string(i));
    }
  }
  return unary(
      "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var clamp(Var a, double lo, double hi) {
  if (lo > hi) throw DomainError("clamp: lo > hi");
  return unary(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var sum(Var a) {
  const auto& av = a.value();
  double acc = 0.0;
  for (double v : av.data()) acc += v;
  return a.tape().record(
      Tensor::scalar(acc), {a.id()},
      [](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        for (auto& v : grads[in].data()) v += g[0];
      });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var l2_norm(Var a) {
  const auto& av = a.value();
  double acc = 0.0;
  for (double v : av.data()) acc += v * v;
  return a.tape().record(
      Tensor::scalar(std::sqrt(acc)), {a.id()},
      [](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        const double norm = tape.value(self)[0];
        if (norm == 0.0) return;  // subgradient 0 at the origin
        const auto& x = tape.value(in);
        auto dst = grads[in].data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[0] * x[i] / norm;
      });
}

Var mean_row_groups(Var a, std::size_t group_rows) {
  const auto& av = a.value();
  require_rank2("mean_row_groups", av.shape());
  const auto rows = av.dim(0), cols = av.dim(1);
  if (group_rows == 0 || rows % group_rows != 0) {
    shape_error("mean_row_groups", av.shape(),
                "divisible into groups of " + std::to_string(group_rows) + " rows");
  }
  const auto groups = rows / group_rows;
  const double inv = 1.0 / static_cast<double>(group_rows);
  std::vector<double> out(groups * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double* orow = out.data() + (r / group_rows) * cols;
    for (std::size_t c = 0; c < cols; ++c) orow[c] += av[r * cols + c];
  }
  for (auto& v : out) v *= inv;
  return a.tape().record(
      Tensor::unchecked({groups, cols}, std::move(out)), {a.id()},
      [rows, cols, group_rows, inv](const Tape& tape, std::size_t self, const Tensor& g,
                                    std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        auto dst = grads[in].data();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* grow = g.data().data() + (r / group_rows) * cols;
          for (std::size_t c = 0; c < cols; ++c) dst[r * cols + c] += grow[c] * inv;
        }
      });
}

Var normalize_rows(Var a) {
  const auto& av = a.value();
  require_rank2("normalize_rows", av.shape());
  const auto rows = av.dim(0), cols = av.dim(1);
  std::vector<double> out(av.size());
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += av[r * cols + c] * av[r * cols + c];
    norms[r] = std::sqrt(acc);
    if (norms[r] == 0.0) {
      throw DomainError("normalize_rows: zero row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = av[r * cols + c] / norms[r];
  }
  return a.tape().record(
      Tensor::unchecked(av.shape(), std::move(out)), {a.id()},
      [rows, cols, norms = std::move(norms)](const Tape& tape, std::size_t self, const Tensor& g,
                                             std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        // y = x/|x|;  dx = (g - y (g.y)) / |x|
        const auto& y = tape.value(self);
        auto dst = grads[in].data();
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
          for (std::size_t c = 0; c < cols; ++c) {
            dst[r * cols + c] += (g[r * cols + c] - y[r * cols + c] * dot) / norms[r];
          }
        }
      });
}

Var softmax_rows(Var a) {
  const auto& av = a.value();
  require_rank2("softmax_rows", av.shape());
  const auto rows = av.dim(0), cols = av.dim(1);
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data().data() + r * cols;
    double* y = out.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      total += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= total;
  }
  return a.tape().record(
      Tensor::unchecked(av.shape(), std::move(out)), {a.id()},
      [rows, cols](const Tape& tape, std::size_t self, const Tensor& g,
                   std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        const auto& y = tape.value(self);
        auto dst = grads[in].data();
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
          for (std::size_t c = 0; c < cols; ++c) {
            dst[r * cols + c] += y[r * cols + c] * (g[r * cols + c] - dot);
          }
        }
      });
}

Var reshape(Var a, Shape shape) {
  const auto& av = a.value();
  if (shape_size(shape) != av.size()) shape_error("reshape", av.shape(), shape);
  return a.tape().record(
      Tensor::unchecked(std::move(shape), av.storage()), {a.id()},
      [](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        auto dst = grads[in].data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
      });
}

Var gather_rows(Var table, std::span<const std::size_t> rows) {
  const auto& tv = table.value();
  require_rank2("gather_rows", tv.shape());
  if (rows.empty()) throw ShapeError("gather_rows: empty row list");
  const auto cols = tv.dim(1);
  std::vector<double> out(rows.size() * cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= tv.dim(0)) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                       shape_string(tv.shape()));
    }
    std::copy_n(tv.data().data() + rows[i] * cols, cols, out.data() + i * cols);
  }
  std::vector<std::size_t> index(rows.begin(), rows.end());
  return table.tape().record(
      Tensor::unchecked({rows.size(), cols}, std::move(out)), {table.id()},
      [cols, index = std::move(index)](const Tape& tape, std::size_t self, const Tensor& g,
                                       std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        auto dst = grads[in].data();
        for (std::size_t i = 0; i < index.size(); ++i) {
          for (std::size_t c = 0; c < cols; ++c) dst[index[i] * cols + c] += g[i * cols + c];
        }
      });
}

namespace {

// Visits (patch_row_index, column, flat_source_index) for extract_patches.
template <class Fn>
void for_each_patch_element(const Shape& s, std::size_t p, Fn fn) {
  const auto n = s[0], h = s[1], w = s[2], ch = s[3];
  const auto ph = h / p, pw = w / p;
  const auto cols = p * p * ch;
  std::size_t row = 0;
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t py = 0; py < ph; ++py) {
      for (std::size_t px = 0; px < pw; ++px, ++row) {
        std::size_t col = 0;
        for (std::size_t dy = 0; dy < p; ++dy) {
          const auto base = ((f * h + py * p + dy) * w + px * p) * ch;
          for (std::size_t k = 0; k < p * ch; ++k, ++col) fn(row * cols + col, base + k);
        }
      }
    }
  }
}

}  // namespace

Var extract_patches(Var images, std::size_t patch) {
  const auto& iv = images.value();
  const auto& s = iv.shape();
  if (s.size() != 4) shape_error("extract_patches", s, "rank 4 [n,H,W,C]");
  if (patch == 0 || s[1] % patch != 0 || s[2] % patch != 0) {
    shape_error("extract_patches", s, "divisible by patch size " + std::to_string(patch));
  }
  const auto rows = s[0] * (s[1] / patch) * (s[2] / patch);
  const auto cols = patch * patch * s[3];
  std::vector<double> out(rows * cols);
  for_each_patch_element(s, patch, [&](std::size_t dst, std::size_t src) { out[dst] = iv[src]; });
  return images.tape().record(
      Tensor::unchecked({rows, cols}, std::move(out)), {images.id()},
      [patch](const Tape& tape, std::size_t self, const Tensor& g, std::vector<Tensor>& grads) {
        const auto in = tape.inputs(self)[0];
        if (!wants(tape, in)) return;
        auto dst = grads[in].data();
        for_each_patch_element(tape.value(in).shape(), patch,
                               [&](std::size_t out_i, std::size_t src) { dst[src] += g[out_i]; });
      });
}

}  // namespace cascade::numcore
