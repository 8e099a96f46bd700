// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/adam.hpp"

#include <cmath>

#include "metaheac/error.hpp"

namespace metaheac {

void Adam::step(ParamSet& params, const ParamSet& grads) {
  if (!params.congruent(grads)) throw Error("adam: gradients are not congruent with parameters");
  if (first_moment_.empty()) {
    first_moment_ = params.zeros_like();
    second_moment_ = params.zeros_like();
  } else if (!first_moment_.congruent(params)) {
    throw Error("adam: parameter layout changed between steps");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.entry(i).value.data();
    auto g = grads.entry(i).value.data();
    auto m = first_moment_.entry(i).value.data();
    auto v = second_moment_.entry(i).value.data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace metaheac
