// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

/// O(P*N) pairwise concordance; ties count one half.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double credit = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) credit += 1.0;
      else if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / pairs;
}

struct SetPR {
  double precision;
  double recall;
  std::size_t hits;
};

/// Top-k by repeated selection of the best remaining candidate (score, then
/// smaller id), followed by plain set intersection.
inline SetPR set_precision_recall(const std::vector<double>& scores, const std::vector<int>& actual,
                                  const std::vector<std::uint64_t>& ids, std::size_t k) {
  std::vector<bool> taken(scores.size(), false);
  std::set<std::uint64_t> top;
  for (std::size_t r = 0; r < k; ++r) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (taken[i]) continue;
      if (best == scores.size() || scores[i] > scores[best] || (scores[i] == scores[best] && ids[i] < ids[best])) {
        best = i;
      }
    }
    taken[best] = true;
    top.insert(ids[best]);
  }
  std::set<std::uint64_t> truth;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (actual[i]) truth.insert(ids[i]);
  }
  std::vector<std::uint64_t> both;
  std::set_intersection(top.begin(), top.end(), truth.begin(), truth.end(), std::back_inserter(both));
  return {static_cast<double>(both.size()) / static_cast<double>(top.size()),
          static_cast<double>(both.size()) / static_cast<double>(truth.size()), both.size()};
}

/// Student t density with v degrees of freedom.
inline double t_density(double x, double v) {
  const double c = std::exp(std::lgamma((v + 1.0) / 2.0) - std::lgamma(v / 2.0)) / std::sqrt(v * M_PI);
  return c * std::pow(1.0 + x * x / v, -(v + 1.0) / 2.0);
}

/// Two-sided p-value 1 - 2 * integral_0^|t| density, composite Simpson rule.
inline double t_two_sided_p(double t, double v) {
  const double a = std::abs(t);
  const int n = 200000;
  const double h = a / n;
  double s = t_density(0.0, v) + t_density(a, v);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * t_density(i * h, v);
  return std::max(0.0, 1.0 - 2.0 * s * h / 3.0);
}

struct TTest {
  double t;
  double p;
};

/// Textbook paired t: t = mean(d) / (sd(d) / sqrt(n)), n - 1 degrees of freedom.
inline TTest paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += (a[i] - b[i]) / n;
  double var = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) var += (a[i] - b[i] - mean) * (a[i] - b[i] - mean) / (n - 1.0);
  const double t = mean / std::sqrt(var / n);
  return {t, t_two_sided_p(t, n - 1.0)};
}

}  // namespace oracle
