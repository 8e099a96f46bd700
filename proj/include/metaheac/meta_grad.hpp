// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "metaheac/param_set.hpp"

namespace metaheac {

/// Builds a scalar loss on `tape` from the given parameter bindings.
using LossFn = std::function<Var(Tape& tape, const BoundParams& params)>;

enum class MetaOrder {
  kFirst,   // treat d(theta_c)/d(theta) as the identity
  kSecond,  // differentiate through the inner step (double backward)
};

struct MetaGradient {
  ParamSet grad;
  double loss_a = 0.0;  // support loss at theta
  double loss_b = 0.0;  // query loss at the adapted parameters
};

/// Gradient of  loss_b(theta - alpha * grad loss_a(theta))  w.r.t. theta.
///
/// The inner step is recorded on the same tape as the outer loss, so in
/// second-order mode the result includes the -alpha * Hessian(loss_a) term.
/// A non-finite support loss or inner gradient throws before the outer pass.
MetaGradient meta_grad(const ParamSet& theta, const LossFn& loss_a, const LossFn& loss_b, double alpha,
                       MetaOrder order = MetaOrder::kSecond);

}  // namespace metaheac
