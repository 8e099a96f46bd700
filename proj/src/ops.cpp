// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "metaheac/error.hpp"

namespace metaheac {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;

[[noreturn]] void shape_error(const char* op, const Shape& a) {
  throw ShapeError(std::string(op) + ": unsupported shape " + shape_to_string(a));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a) + " vs " + shape_to_string(b));
}

void require_same(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) shape_error(op, a.shape(), b.shape());
}

void require_matrix(const char* op, const Var& x) {
  if (x.value().rank() != 2) shape_error(op, x.shape());
}

template <typename F>
Tensor map_unary(const Tensor& x, F f) {
  Tensor out(x.shape());
  auto src = x.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <typename F>
Tensor map_binary(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
  return out;
}

ConstMatrixMap as_matrix(const Tensor& t) { return ConstMatrixMap(t.data().data(), t.rows(), t.cols()); }

}  // namespace

void Bags::push(std::span<const std::uint32_t> bag_ids) {
  // Sorted within the bag so the pooled sum does not depend on input order.
  const auto begin = ids.insert(ids.end(), bag_ids.begin(), bag_ids.end());
  std::sort(begin, ids.end());
  offsets.push_back(static_cast<std::uint32_t>(ids.size()));
}

Var add(const Var& a, const Var& b) {
  require_same("add", a, b);
  return a.tape().record("add", map_binary(a.value(), b.value(), [](double x, double y) { return x + y; }), {a, b},
                         [](std::span<const Var>, const Var&, const Var& g) { return InputGrads{g, g}; });
}

Var sub(const Var& a, const Var& b) {
  require_same("sub", a, b);
  return a.tape().record("sub", map_binary(a.value(), b.value(), [](double x, double y) { return x - y; }), {a, b},
                         [](std::span<const Var> in, const Var&, const Var& g) {
                           InputGrads grads{g, std::nullopt};
                           if (in[1].requires_grad()) grads[1] = neg(g);
                           return grads;
                         });
}

Var mul(const Var& a, const Var& b) {
  require_same("mul", a, b);
  return a.tape().record("mul", map_binary(a.value(), b.value(), [](double x, double y) { return x * y; }), {a, b},
                         [](std::span<const Var> in, const Var&, const Var& g) {
                           InputGrads grads(2);
                           if (in[0].requires_grad()) grads[0] = mul(g, in[1]);
                           if (in[1].requires_grad()) grads[1] = mul(g, in[0]);
                           return grads;
                         });
}

Var scale(const Var& a, double factor) {
  return a.tape().record("scale", map_unary(a.value(), [factor](double x) { return x * factor; }), {a},
                         [factor](std::span<const Var>, const Var&, const Var& g) {
                           return InputGrads{scale(g, factor)};
                         });
}

Var add_scalar(const Var& a, double offset) {
  return a.tape().record("add_scalar", map_unary(a.value(), [offset](double x) { return x + offset; }), {a},
                         [](std::span<const Var>, const Var&, const Var& g) { return InputGrads{g}; });
}

Var neg(const Var& a) {
  return a.tape().record("neg", map_unary(a.value(), [](double x) { return -x; }), {a},
                         [](std::span<const Var>, const Var&, const Var& g) { return InputGrads{neg(g)}; });
}

Var matmul(const Var& a, const Var& b, bool transpose_a, bool transpose_b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const auto& av = a.value();
  const auto& bv = b.value();
  const std::size_t m = transpose_a ? av.cols() : av.rows();
  const std::size_t ka = transpose_a ? av.rows() : av.cols();
  const std::size_t kb = transpose_b ? bv.cols() : bv.rows();
  const std::size_t n = transpose_b ? bv.rows() : bv.cols();
  if (ka != kb) shape_error("matmul", av.shape(), bv.shape());

  Tensor out({m, n});
  MatrixMap c(out.data().data(), m, n);
  auto am = as_matrix(av);
  auto bm = as_matrix(bv);
  if (!transpose_a && !transpose_b) {
    c.noalias() = am * bm;
  } else if (transpose_a && !transpose_b) {
    c.noalias() = am.transpose() * bm;
  } else if (!transpose_a && transpose_b) {
    c.noalias() = am * bm.transpose();
  } else {
    c.noalias() = am.transpose() * bm.transpose();
  }

  return a.tape().record("matmul", std::move(out), {a, b},
                         [transpose_a, transpose_b](std::span<const Var> in, const Var&, const Var& g) {
                           InputGrads grads(2);
                           if (in[0].requires_grad()) {
                             grads[0] = transpose_a ? matmul(in[1], g, transpose_b, true)
                                                    : matmul(g, in[1], false, !transpose_b);
                           }
                           if (in[1].requires_grad()) {
                             grads[1] = transpose_b ? matmul(g, in[0], true, transpose_a)
                                                    : matmul(in[0], g, !transpose_a, false);
                           }
                           return grads;
                         });
}

Var add_bias(const Var& x, const Var& bias) {
  require_matrix("add_bias", x);
  if (bias.value().rank() != 1 || bias.shape()[0] != x.value().cols()) {
    shape_error("add_bias", x.shape(), bias.shape());
  }
  Tensor out = x.value();
  const std::size_t cols = out.cols();
  auto b = bias.value().data();
  auto dst = out.data();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) dst[r * cols + c] += b[c];
  }
  return x.tape().record("add_bias", std::move(out), {x, bias},
                         [](std::span<const Var> in, const Var&, const Var& g) {
                           InputGrads grads{g, std::nullopt};
                           if (in[1].requires_grad()) grads[1] = sum_rows(g);
                           return grads;
                         });
}

Var sum_rows(const Var& x) {
  require_matrix("sum_rows", x);
  const auto& xv = x.value();
  Tensor out({xv.cols()});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < xv.cols(); ++c) out[c] += xv.at(r, c);
  }
  const std::size_t rows = xv.rows();
  return x.tape().record("sum_rows", std::move(out), {x},
                         [rows](std::span<const Var>, const Var&, const Var& g) {
                           return InputGrads{broadcast_rows(g, rows)};
                         });
}

Var broadcast_rows(const Var& v, std::size_t n) {
  if (v.value().rank() != 1) shape_error("broadcast_rows", v.shape());
  const auto& vv = v.value();
  Tensor out({n, vv.size()});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy(vv.data().begin(), vv.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(r * vv.size()));
  }
  return v.tape().record("broadcast_rows", std::move(out), {v},
                         [](std::span<const Var>, const Var&, const Var& g) { return InputGrads{sum_rows(g)}; });
}

Var row_sum(const Var& x) {
  require_matrix("row_sum", x);
  const auto& xv = x.value();
  Tensor out({xv.rows(), 1});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < xv.cols(); ++c) s += xv.at(r, c);
    out[r] = s;
  }
  const std::size_t cols = xv.cols();
  return x.tape().record("row_sum", std::move(out), {x},
                         [cols](std::span<const Var>, const Var&, const Var& g) {
                           return InputGrads{broadcast_cols(g, cols)};
                         });
}

Var broadcast_cols(const Var& x, std::size_t n) {
  if (x.value().rank() != 2 || x.value().cols() != 1) shape_error("broadcast_cols", x.shape());
  const auto& xv = x.value();
  Tensor out({xv.rows(), n});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) = xv[r];
  }
  return x.tape().record("broadcast_cols", std::move(out), {x},
                         [](std::span<const Var>, const Var&, const Var& g) { return InputGrads{row_sum(g)}; });
}

Var relu(const Var& x) {
  return x.tape().record("relu", map_unary(x.value(), [](double v) { return v > 0.0 ? v : 0.0; }), {x},
                         [](std::span<const Var> in, const Var&, const Var& g) {
                           Tensor mask = map_unary(in[0].value(), [](double v) { return v > 0.0 ? 1.0 : 0.0; });
                           return InputGrads{mul(g, g.tape().constant(std::move(mask)))};
                         });
}

Var sigmoid(const Var& x) {
  auto f = [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  return x.tape().record("sigmoid", map_unary(x.value(), f), {x},
                         [](std::span<const Var>, const Var& y, const Var& g) {
                           return InputGrads{mul(g, mul(y, add_scalar(neg(y), 1.0)))};
                         });
}

Var softmax_rows(const Var& x) {
  require_matrix("softmax", x);
  const auto& xv = x.value();
  Tensor out(xv.shape());
  const std::size_t cols = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double mx = xv.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, xv.at(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      out.at(r, c) = std::exp(xv.at(r, c) - mx);
      total += out.at(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) /= total;
  }
  return x.tape().record("softmax", std::move(out), {x},
                         [cols](std::span<const Var>, const Var& y, const Var& g) {
                           Var dot = broadcast_cols(row_sum(mul(g, y)), cols);
                           return InputGrads{mul(y, sub(g, dot))};
                         });
}

Var log(const Var& x) {
  return x.tape().record("log", map_unary(x.value(), [](double v) { return std::log(v); }), {x},
                         [](std::span<const Var> in, const Var&, const Var& g) {
                           return InputGrads{mul(g, reciprocal(in[0]))};
                         });
}

Var reciprocal(const Var& x) {
  return x.tape().record("reciprocal", map_unary(x.value(), [](double v) { return 1.0 / v; }), {x},
                         [](std::span<const Var>, const Var& r, const Var& g) {
                           return InputGrads{neg(mul(g, mul(r, r)))};
                         });
}

Var clamp(const Var& x, double lo, double hi) {
  return x.tape().record("clamp", map_unary(x.value(), [lo, hi](double v) { return std::clamp(v, lo, hi); }), {x},
                         [lo, hi](std::span<const Var> in, const Var&, const Var& g) {
                           Tensor mask =
                               map_unary(in[0].value(), [lo, hi](double v) { return v >= lo && v <= hi ? 1.0 : 0.0; });
                           return InputGrads{mul(g, g.tape().constant(std::move(mask)))};
                         });
}

Var sum_all(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  Shape shape = x.shape();
  return x.tape().record("sum_all", Tensor::scalar(s), {x},
                         [shape](std::span<const Var>, const Var&, const Var& g) {
                           return InputGrads{broadcast_scalar(g, shape)};
                         });
}

Var mean_all(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const double n = static_cast<double>(x.value().size());
  Shape shape = x.shape();
  return x.tape().record("mean_all", Tensor::scalar(s / n), {x},
                         [shape, n](std::span<const Var>, const Var&, const Var& g) {
                           return InputGrads{scale(broadcast_scalar(g, shape), 1.0 / n)};
                         });
}

Var broadcast_scalar(const Var& s, const Shape& shape) {
  if (!s.value().is_scalar()) shape_error("broadcast_scalar", s.shape());
  return s.tape().record("broadcast_scalar", Tensor(shape, s.value()[0]), {s},
                         [](std::span<const Var>, const Var&, const Var& g) { return InputGrads{sum_all(g)}; });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const std::size_t rows = parts[0].value().rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix("concat", p);
    if (p.value().rows() != rows) shape_error("concat", parts[0].shape(), p.shape());
    total += p.value().cols();
  }
  Tensor out({rows, total});
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto& pv = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.data().begin() + static_cast<std::ptrdiff_t>(r * pv.cols()), pv.cols(),
                  out.data().begin() + static_cast<std::ptrdiff_t>(r * total + offset));
    }
    widths.push_back(pv.cols());
    offset += pv.cols();
  }
  return parts[0].tape().record("concat", std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                                [widths](std::span<const Var> in, const Var&, const Var& g) {
                                  InputGrads grads(in.size());
                                  std::size_t begin = 0;
                                  for (std::size_t i = 0; i < in.size(); ++i) {
                                    if (in[i].requires_grad()) grads[i] = slice_cols(g, begin, widths[i]);
                                    begin += widths[i];
                                  }
                                  return grads;
                                });
}

Var slice_cols(const Var& x, std::size_t begin, std::size_t width) {
  require_matrix("slice_cols", x);
  const auto& xv = x.value();
  const std::size_t total = xv.cols();
  if (width == 0 || begin + width > total) {
    throw ShapeError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + width) +
                     ") out of range for " + shape_to_string(xv.shape()));
  }
  Tensor out({xv.rows(), width});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    std::copy_n(xv.data().begin() + static_cast<std::ptrdiff_t>(r * total + begin), width,
                out.data().begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  return x.tape().record("slice_cols", std::move(out), {x},
                         [begin, total](std::span<const Var>, const Var&, const Var& g) {
                           return InputGrads{pad_cols(g, begin, total)};
                         });
}

Var pad_cols(const Var& x, std::size_t begin, std::size_t total) {
  require_matrix("pad_cols", x);
  const auto& xv = x.value();
  const std::size_t width = xv.cols();
  if (begin + width > total) {
    throw ShapeError("pad_cols: width " + std::to_string(width) + " at " + std::to_string(begin) +
                     " exceeds " + std::to_string(total));
  }
  Tensor out({xv.rows(), total});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    std::copy_n(xv.data().begin() + static_cast<std::ptrdiff_t>(r * width), width,
                out.data().begin() + static_cast<std::ptrdiff_t>(r * total + begin));
  }
  return x.tape().record("pad_cols", std::move(out), {x},
                         [begin, width](std::span<const Var>, const Var&, const Var& g) {
                           return InputGrads{slice_cols(g, begin, width)};
                         });
}

Var mean_of(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("mean_of: no operands");
  Var total = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) total = add(total, parts[i]);
  if (parts.size() == 1) return total;
  return scale(total, 1.0 / static_cast<double>(parts.size()));
}

Var embedding_bag(const Var& table, std::shared_ptr<const Bags> bags) {
  require_matrix("embedding_bag", table);
  const auto& tv = table.value();
  const std::size_t k = tv.cols();
  const std::size_t vocab = tv.rows();
  Tensor out({bags->size(), k});
  for (std::size_t b = 0; b < bags->size(); ++b) {
    auto ids = bags->bag(b);
    if (ids.empty()) throw ShapeError("embedding_bag: empty bag at row " + std::to_string(b));
    const double w = 1.0 / static_cast<double>(ids.size());
    double* dst = out.data().data() + b * k;
    for (auto id : ids) {
      if (id >= vocab) {
        throw ShapeError("embedding_bag: id " + std::to_string(id) + " outside table " + shape_to_string(tv.shape()));
      }
      const double* src = tv.data().data() + static_cast<std::size_t>(id) * k;
      for (std::size_t c = 0; c < k; ++c) dst[c] += w * src[c];
    }
  }
  return table.tape().record("embedding_bag", std::move(out), {table},
                             [bags, vocab](std::span<const Var>, const Var&, const Var& g) {
                               return InputGrads{scatter_bag(g, bags, vocab)};
                             });
}

Var scatter_bag(const Var& rows, std::shared_ptr<const Bags> bags, std::size_t vocab) {
  require_matrix("scatter_bag", rows);
  const auto& rv = rows.value();
  if (rv.rows() != bags->size()) shape_error("scatter_bag", rv.shape(), Shape{bags->size()});
  const std::size_t k = rv.cols();
  Tensor out({vocab, k});
  for (std::size_t b = 0; b < bags->size(); ++b) {
    auto ids = bags->bag(b);
    const double w = 1.0 / static_cast<double>(ids.size());
    const double* src = rv.data().data() + b * k;
    for (auto id : ids) {
      double* dst = out.data().data() + static_cast<std::size_t>(id) * k;
      for (std::size_t c = 0; c < k; ++c) dst[c] += w * src[c];
    }
  }
  return rows.tape().record("scatter_bag", std::move(out), {rows},
                            [bags](std::span<const Var>, const Var&, const Var& g) {
                              return InputGrads{embedding_bag(g, bags)};
                            });
}

Var bce_loss(const Var& p, std::span<const double> labels, Reduction reduction) {
  if (p.value().size() != labels.size()) {
    shape_error("bce_loss", p.shape(), Shape{labels.size()});
  }
  Tape& tape = p.tape();
  Tensor y(p.shape());
  Tensor one_minus_y(p.shape());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = labels[i];
    one_minus_y[i] = 1.0 - labels[i];
  }
  Var pc = clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  Var pos = mul(tape.constant(std::move(y)), log(pc));
  Var negative = mul(tape.constant(std::move(one_minus_y)), log(add_scalar(neg(pc), 1.0)));
  Var per_example = neg(add(pos, negative));
  return reduction == Reduction::kMean ? mean_all(per_example) : sum_all(per_example);
}

}  // namespace metaheac
