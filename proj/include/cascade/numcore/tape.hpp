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

#ifndef CASCADE_NUMCORE_TAPE_HPP_
#define CASCADE_NUMCORE_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cascade/numcore/tensor.hpp"

namespace cascade::numcore {

class Tape;
class Gradients;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// tape that issued it is alive.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Adds the contribution of one node to the gradients of its inputs.
// `self` is the node id; `grads` is indexed by node id and pre-sized with
// zero tensors for every node that requires a gradient.
using BackwardRule =
    std::function<void(const Tape& tape, std::size_t self, const Tensor& grad_out,
                       std::vector<Tensor>& grads)>;

// Append-only record of primitive evaluations. Nodes are stored in
// creation order, which is a topological order of the graph.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Used by primitives. requires_grad is inherited from the inputs.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardRule rule);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  std::span<const std::size_t> inputs(std::size_t id) const { return nodes_.at(id).inputs; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar root. Throws ShapeError for a non-scalar
  // root. Does not mutate the tape; repeated calls give identical results.
  Gradients backward(Var root) const;

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    bool requires_grad = false;
    BackwardRule rule;
  };
  std::vector<Node> nodes_;
};

class Gradients {
 public:
  // Gradient of the root w.r.t. `v`; zeros when `v` does not reach the root.
  Tensor of(Var v) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<Tensor> grads_;
};

}  // namespace cascade::numcore

#endif  // CASCADE_NUMCORE_TAPE_HPP_
