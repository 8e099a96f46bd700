// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/meta_grad.hpp"

#include <cmath>

#include "metaheac/error.hpp"
#include "metaheac/ops.hpp"

namespace metaheac {

MetaGradient meta_grad(const ParamSet& theta, const LossFn& loss_a, const LossFn& loss_b, double alpha,
                       MetaOrder order) {
  if (!(alpha >= 0.0)) throw ConfigError("meta_grad: alpha must be non-negative");

  Tape tape;
  BoundParams params = BoundParams::bind(tape, theta);

  MetaGradient out;
  Var support = loss_a(tape, params);
  out.loss_a = support.value().item();
  if (!std::isfinite(out.loss_a)) throw NonFiniteError("loss_a", "meta_grad: non-finite support loss");

  const bool second_order = order == MetaOrder::kSecond;
  std::vector<Var> inner = tape.gradient(support, params.vars(), second_order);

  std::vector<Var> adapted;
  adapted.reserve(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (!inner[i].value().all_finite()) {
      throw NonFiniteError(params.names()[i], "meta_grad: non-finite inner gradient for '" + params.names()[i] + "'");
    }
    adapted.push_back(alpha == 0.0 ? params.vars()[i] : sub(params.vars()[i], scale(inner[i], alpha)));
  }

  Var query = loss_b(tape, params.with_vars(std::move(adapted)));
  out.loss_b = query.value().item();
  out.grad = grad(query, params);
  return out;
}

}  // namespace metaheac
