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

#include "cascade/numcore/tape.hpp"

#include "cascade/error.hpp"

namespace cascade::numcore {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), {}, requires_grad, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardRule rule) {
  bool needs = false;
  for (auto id : inputs) {
    if (id >= nodes_.size()) throw Error("tape: input id out of range");
    needs = needs || nodes_[id].requires_grad;
  }
  nodes_.push_back(
      Node{std::move(value), std::move(inputs), needs, needs ? std::move(rule) : nullptr});
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var root) const {
  if (&root.tape() != this) throw Error("backward: root belongs to another tape");
  const auto& root_value = value(root.id());
  if (root_value.size() != 1) {
    throw ShapeError("backward: root must be scalar, got shape " +
                     shape_string(root_value.shape()));
  }

  Gradients out;
  out.tape_ = this;
  out.grads_.resize(root.id() + 1);
  for (std::size_t i = 0; i <= root.id(); ++i) {
    if (nodes_[i].requires_grad) out.grads_[i] = Tensor::zeros(nodes_[i].value.shape());
  }
  if (!nodes_[root.id()].requires_grad) return out;

  out.grads_[root.id()].data()[0] = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    const auto& node = nodes_[i];
    if (!node.requires_grad || !node.rule) continue;
    node.rule(*this, i, out.grads_[i], out.grads_);
  }
  return out;
}

Tensor Gradients::of(Var v) const {
  if (v.id() < grads_.size() && !grads_[v.id()].empty()) return grads_[v.id()];
  return Tensor::zeros(v.value().shape());
}

}  // namespace cascade::numcore
