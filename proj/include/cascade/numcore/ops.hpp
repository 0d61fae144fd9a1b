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

#ifndef CASCADE_NUMCORE_OPS_HPP_
#define CASCADE_NUMCORE_OPS_HPP_

#include <cstddef>
#include <span>

#include "cascade/numcore/tape.hpp"

// Differentiable primitives. Each op records its forward value on the tape
// of its first argument and throws ShapeError naming the op and the
// offending shapes when the inputs are incompatible. There is no general
// broadcasting; the few broadcast forms that the losses need have their
// own entry points.
namespace cascade::numcore {

// [m,k] x [k,n] -> [m,n]
Var matmul(Var a, Var b);
// Same-shape element-wise ops.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
// [m,n] + [1,n] or [n]: adds a bias row to every row.
Var add_row(Var a, Var bias_row);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
// a / s where s holds exactly one element.
Var div_scalar(Var a, Var s);

Var tanh(Var a);
Var relu(Var a);
// Throws DomainError if any input is <= 0.
Var log(Var a);
// Pass-through gradient inside [lo, hi] (inclusive), zero outside.
Var clamp(Var a, double lo, double hi);

// Reductions to a one-element tensor of shape [1].
Var sum(Var a);
Var mean(Var a);
Var l2_norm(Var a);

// [m,n] -> [m/group_rows, n]: mean over consecutive blocks of rows.
Var mean_row_groups(Var a, std::size_t group_rows);
// Row-wise L2 normalization of a rank-2 tensor. Throws DomainError on a
// zero row.
Var normalize_rows(Var a);
// Row-wise softmax of a rank-2 tensor, computed with max-subtraction.
Var softmax_rows(Var a);

Var reshape(Var a, Shape shape);
// Selects rows of a rank-2 table; repeated indices accumulate gradient.
Var gather_rows(Var table, std::span<const std::size_t> rows);
// [n,H,W,C] -> [n*(H/p)*(W/p), p*p*C]. Each output row is one
// non-overlapping p x p patch flattened in (row, col, channel) order; patch
// rows are ordered frame-major, then patch row, then patch column.
Var extract_patches(Var images, std::size_t patch);

}  // namespace cascade::numcore

#endif  // CASCADE_NUMCORE_OPS_HPP_
