// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "metaheac/param_set.hpp"

namespace metaheac {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are created lazily, congruent
/// with the first parameter set passed to step().
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// params <- params - lr * m_hat / (sqrt(v_hat) + eps)
  void step(ParamSet& params, const ParamSet& grads);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  AdamConfig config_;
  ParamSet first_moment_;
  ParamSet second_moment_;
  std::uint64_t steps_ = 0;
};

}  // namespace metaheac
