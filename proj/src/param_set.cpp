// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/param_set.hpp"

#include "metaheac/error.hpp"

namespace metaheac {

void ParamSet::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw Error("param set: duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), std::move(value)});
}

std::size_t ParamSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error("param set: no parameter '" + std::string(name) + "'");
  return it->second;
}

bool ParamSet::contains(std::string_view name) const { return index_.contains(std::string(name)); }
const Tensor& ParamSet::at(std::string_view name) const { return entries_[index_of(name)].value; }
Tensor& ParamSet::at(std::string_view name) { return entries_[index_of(name)].value; }

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool ParamSet::congruent(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.shape() != other.entries_[i].value.shape()) return false;
  }
  return true;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Tensor(e.value.shape(), 0.0));
  return out;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (!congruent(other)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].value != other.entries_[i].value) return false;
  }
  return true;
}

BoundParams BoundParams::bind(Tape& tape, const ParamSet& params, bool requires_grad) {
  BoundParams out;
  auto names = std::make_shared<std::vector<std::string>>();
  auto index = std::make_shared<std::unordered_map<std::string, std::size_t>>();
  for (const auto& e : params) {
    index->emplace(e.name, names->size());
    names->push_back(e.name);
    out.vars_.push_back(requires_grad ? tape.variable(e.value) : tape.constant(e.value));
  }
  out.names_ = std::move(names);
  out.index_ = std::move(index);
  return out;
}

const Var& BoundParams::operator[](std::string_view name) const {
  auto it = index_->find(std::string(name));
  if (it == index_->end()) throw Error("bound params: no parameter '" + std::string(name) + "'");
  return vars_[it->second];
}

BoundParams BoundParams::with_vars(std::vector<Var> vars) const {
  if (vars.size() != vars_.size()) throw Error("bound params: rebinding with wrong count");
  BoundParams out = *this;
  out.vars_ = std::move(vars);
  return out;
}

ParamSet BoundParams::values() const {
  ParamSet out;
  for (std::size_t i = 0; i < vars_.size(); ++i) out.add((*names_)[i], vars_[i].value());
  return out;
}

void check_finite(const ParamSet& params, std::string_view what) {
  for (const auto& e : params) {
    if (!e.value.all_finite()) {
      throw NonFiniteError(e.name, std::string(what) + ": non-finite values in '" + e.name + "'");
    }
  }
}

ParamSet grad(const Var& root, const BoundParams& wrt) {
  if (!root.value().all_finite()) throw NonFiniteError("loss", "grad: non-finite loss");
  auto grads = root.tape().gradient(root, wrt.vars(), false);
  ParamSet out;
  for (std::size_t i = 0; i < grads.size(); ++i) out.add(wrt.names()[i], grads[i].value());
  check_finite(out, "grad");
  return out;
}

}  // namespace metaheac
