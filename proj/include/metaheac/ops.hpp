// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "metaheac/tape.hpp"

namespace metaheac {

// Differentiable primitives. Every op records its result on the tape of its
// inputs and checks operand shapes, throwing ShapeError naming the primitive.
// Matrices are rank-2 [rows, cols]; bias vectors are rank-1 [cols].

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var neg(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }
inline Var operator-(const Var& a) { return neg(a); }

/// op(a) * op(b) where op transposes when the flag is set.
Var matmul(const Var& a, const Var& b, bool transpose_a = false, bool transpose_b = false);

Var add_bias(const Var& x, const Var& bias);     // [B,d] + [d]
Var sum_rows(const Var& x);                      // [B,d] -> [d]
Var broadcast_rows(const Var& v, std::size_t n);  // [d] -> [n,d]
Var row_sum(const Var& x);                       // [B,d] -> [B,1]
Var broadcast_cols(const Var& x, std::size_t n);  // [B,1] -> [B,n]

Var relu(const Var& x);
Var sigmoid(const Var& x);
Var softmax_rows(const Var& x);
Var log(const Var& x);
Var reciprocal(const Var& x);
Var clamp(const Var& x, double lo, double hi);

Var sum_all(const Var& x);
Var mean_all(const Var& x);
Var broadcast_scalar(const Var& s, const Shape& shape);

Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& x, std::size_t begin, std::size_t width);
Var pad_cols(const Var& x, std::size_t begin, std::size_t total);

/// Elementwise mean of equally shaped operands.
Var mean_of(std::span<const Var> parts);

/// Ragged id lists in CSR layout: bag b holds ids[offsets[b] .. offsets[b+1]),
/// sorted by push().
struct Bags {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> ids;

  std::size_t size() const noexcept { return offsets.size() - 1; }
  std::span<const std::uint32_t> bag(std::size_t b) const {
    return std::span<const std::uint32_t>(ids).subspan(offsets[b], offsets[b + 1] - offsets[b]);
  }
  void push(std::span<const std::uint32_t> bag_ids);
};

/// Row b of the result is the mean of table rows listed in bag b. [V,k] -> [B,k]
Var embedding_bag(const Var& table, std::shared_ptr<const Bags> bags);
/// Adjoint of embedding_bag: scatters each row back into a zero [V,k] table.
Var scatter_bag(const Var& rows, std::shared_ptr<const Bags> bags, std::size_t vocab);

enum class Reduction { kMean, kSum };

/// Binary cross-entropy of probabilities `p` [B,1] against constant labels.
/// Probabilities are clamped to [1e-12, 1 - 1e-12].
Var bce_loss(const Var& p, std::span<const double> labels, Reduction reduction = Reduction::kMean);

inline constexpr double kProbabilityClamp = 1e-12;

}  // namespace metaheac
