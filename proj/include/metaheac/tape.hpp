// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "metaheac/tensor.hpp"

namespace metaheac {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Input gradients produced by a backward rule, one slot per recorded input.
/// A slot may be left empty when the input does not require a gradient.
using InputGrads = std::vector<std::optional<Var>>;

/// Backward rules are written in terms of recorded ops, so the gradient
/// computation is itself differentiable when the tape records it.
using BackwardFn = std::function<InputGrads(std::span<const Var> inputs, const Var& output, const Var& grad)>;

/// Append-only record of primitive ops. Inputs are always recorded before
/// their consumers, so node ids are a topological order.
///
/// A Tape is single-threaded. Independent tapes may run on different threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  Var record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::string_view op(std::size_t id) const { return nodes_[id].op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from `root` (which must hold a single element). Returns one
  /// gradient per entry of `wrt`; parameters the root does not depend on get
  /// zeros. With `create_graph` the sweep is recorded with gradient tracking,
  /// so the returned gradients can be differentiated again.
  std::vector<Var> gradient(const Var& root, std::span<const Var> wrt, bool create_graph = false);

  bool grad_enabled() const noexcept { return grad_enabled_; }

  /// Disables gradient tracking for ops recorded while alive.
  class NoGradGuard {
   public:
    explicit NoGradGuard(Tape& tape) : tape_(tape), previous_(tape.grad_enabled_) { tape.grad_enabled_ = false; }
    ~NoGradGuard() { tape_.grad_enabled_ = previous_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

   private:
    Tape& tape_;
    bool previous_;
  };

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    std::vector<Var> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  // deque keeps references to recorded values stable while the tape grows.
  std::deque<Node> nodes_;
  bool grad_enabled_ = true;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace metaheac
