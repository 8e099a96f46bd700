// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "metaheac/tape.hpp"
#include "metaheac/tensor.hpp"

namespace metaheac {

/// Named model parameters in insertion order. Names are unique and the order
/// is what save/load and every gradient routine iterate over.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  void add(std::string name, Tensor value);
  bool contains(std::string_view name) const;
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  Entry& entry(std::size_t i) { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  std::size_t parameter_count() const;

  /// Same names, in the same order, with the same shapes.
  bool congruent(const ParamSet& other) const;
  ParamSet zeros_like() const;

  bool operator==(const ParamSet& other) const;

 private:
  std::size_t index_of(std::string_view name) const;

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A ParamSet's entries recorded on a tape, addressable by name.
class BoundParams {
 public:
  BoundParams() = default;

  /// Records every entry as a differentiable leaf (or a constant).
  static BoundParams bind(Tape& tape, const ParamSet& params, bool requires_grad = true);

  const Var& operator[](std::string_view name) const;
  bool contains(std::string_view name) const { return index_->contains(std::string(name)); }
  std::span<const Var> vars() const noexcept { return vars_; }
  const std::vector<std::string>& names() const noexcept { return *names_; }
  std::size_t size() const noexcept { return vars_.size(); }

  /// Same names bound to different vars (e.g. adapted parameters).
  BoundParams with_vars(std::vector<Var> vars) const;

  /// Copies the current values off the tape.
  ParamSet values() const;

 private:
  std::shared_ptr<const std::vector<std::string>> names_;
  std::shared_ptr<const std::unordered_map<std::string, std::size_t>> index_;
  std::vector<Var> vars_;
};

/// Gradient of a scalar root w.r.t. every bound parameter, congruent with
/// `wrt`. Throws NonFiniteError naming the first non-finite gradient.
ParamSet grad(const Var& root, const BoundParams& wrt);

/// Throws NonFiniteError if any entry holds NaN/Inf. `what` prefixes the message.
void check_finite(const ParamSet& params, std::string_view what);

}  // namespace metaheac
