// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/tape.hpp"

#include "metaheac/error.hpp"
#include "metaheac/ops.hpp"

namespace metaheac {

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{"constant", std::move(value), {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{"variable", std::move(value), {}, nullptr, grad_enabled_});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  bool needs_grad = false;
  if (grad_enabled_) {
    for (const auto& in : inputs) {
      if (&in.tape() != this) throw Error(std::string(op) + ": input recorded on a different tape");
      needs_grad = needs_grad || in.requires_grad();
    }
  }
  Node node{op, std::move(value), {}, {}, needs_grad};
  if (needs_grad) {
    node.inputs = std::move(inputs);
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::vector<Var> Tape::gradient(const Var& root, std::span<const Var> wrt, bool create_graph) {
  if (&root.tape() != this) throw Error("gradient: root recorded on a different tape");
  if (!root.value().is_scalar()) {
    throw ShapeError("gradient: root must be scalar, got shape " + shape_to_string(root.shape()));
  }

  std::optional<NoGradGuard> guard;
  if (!create_graph) guard.emplace(*this);

  const std::size_t root_id = root.id();
  std::vector<std::optional<Var>> adjoint(root_id + 1);
  adjoint[root_id] = constant(Tensor(root.shape(), 1.0));

  for (std::size_t i = root_id + 1; i-- > 0;) {
    if (!adjoint[i] || !nodes_[i].requires_grad || !nodes_[i].backward) continue;
    // Copy out: the backward rule appends to nodes_, but deque references stay valid.
    const Node& node = nodes_[i];
    InputGrads grads = node.backward(node.inputs, Var(this, i), *adjoint[i]);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      if (k >= grads.size() || !grads[k]) continue;
      const Var& in = node.inputs[k];
      if (!in.requires_grad()) continue;
      auto& slot = adjoint[in.id()];
      slot = slot ? add(*slot, *grads[k]) : *grads[k];
    }
  }

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (const auto& w : wrt) {
    if (w.id() <= root_id && adjoint[w.id()]) {
      result.push_back(*adjoint[w.id()]);
    } else {
      result.push_back(constant(Tensor(w.shape(), 0.0)));
    }
  }
  return result;
}

}  // namespace metaheac
