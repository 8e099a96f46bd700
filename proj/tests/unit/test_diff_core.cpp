// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "../oracles/finite_difference.hpp"
#include "metaheac/error.hpp"
#include "metaheac/meta_grad.hpp"
#include "metaheac/ops.hpp"
#include "metaheac/param_set.hpp"
#include "metaheac/rng.hpp"

using namespace metaheac;

namespace {

using Primitive = std::function<Var(std::span<const Var>)>;

Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(shape);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

struct PrimitiveCheck {
  double first = 0.0;   // max rel. error of the gradient
  double second = 0.0;  // max rel. error of a Hessian-vector product
};

// Projects the primitive's output onto fixed random weights, then compares
// tape gradients (and gradients of <grad, v>) with central differences.
PrimitiveCheck check_primitive(const Primitive& op, std::vector<Tensor> inputs, Rng& rng) {
  Tensor projection;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.constant(t));
    projection = random_tensor(op(vars).shape(), rng, -1.0, 1.0);
  }
  std::vector<double> flat;
  for (const auto& t : inputs) flat.insert(flat.end(), t.data().begin(), t.data().end());
  const Tensor direction = random_tensor({flat.size()}, rng, -1.0, 1.0);

  auto unflatten = [&](Tape& tape, const std::vector<double>& x) {
    std::vector<Var> vars;
    std::size_t at = 0;
    for (const auto& t : inputs) {
      Tensor v(t.shape());
      for (auto& e : v.data()) e = x[at++];
      vars.push_back(tape.variable(std::move(v)));
    }
    return vars;
  };
  auto objective = [&](Tape& tape, std::span<const Var> vars) {
    return sum_all(mul(op(vars), tape.constant(projection)));
  };
  auto gradient_at = [&](const std::vector<double>& x, bool second) {
    Tape tape;
    auto vars = unflatten(tape, x);
    auto g = tape.gradient(objective(tape, vars), vars, second);
    std::vector<double> out;
    if (!second) {
      for (const auto& gi : g) out.insert(out.end(), gi.value().data().begin(), gi.value().data().end());
      return out;
    }
    // d/dx <grad f(x), v>
    Var hv;
    std::size_t at = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      Tensor v(g[i].shape());
      for (auto& e : v.data()) e = direction[at++];
      Var term = sum_all(mul(g[i], tape.constant(std::move(v))));
      hv = i == 0 ? term : add(hv, term);
    }
    for (const auto& h : tape.gradient(hv, vars)) out.insert(out.end(), h.value().data().begin(), h.value().data().end());
    return out;
  };
  auto f = [&](const std::vector<double>& x) {
    Tape tape;
    auto vars = unflatten(tape, x);
    return objective(tape, vars).value().item();
  };
  auto grad_dot_v = [&](const std::vector<double>& x) {
    auto g = gradient_at(x, false);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * direction[i];
    return s;
  };
  PrimitiveCheck r;
  r.first = oracle::max_relative_error(gradient_at(flat, false), oracle::central_gradient(f, flat), 1e-6);
  r.second = oracle::max_relative_error(gradient_at(flat, true), oracle::central_gradient(grad_dot_v, flat), 1e-6);
  return r;
}

}  // namespace

TEST_CASE("softmax and sigmoid reference values") {
  Tape tape;
  auto s = softmax_rows(tape.constant(Tensor::matrix(1, 3, {0, 0, 0}))).value();
  for (double v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  auto t = softmax_rows(tape.constant(Tensor::matrix(1, 3, {std::log(2.0), 0, 0}))).value();
  CHECK(t[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(t[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(t[2] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(sigmoid(tape.constant(Tensor::scalar(0.0))).value().item() == 0.5);
}

TEST_CASE("softmax rows sum to one and stay positive") {
  Rng rng(3);
  Tape tape;
  auto s = softmax_rows(tape.constant(random_tensor({20, 7}, rng, -30.0, 30.0))).value();
  for (std::size_t r = 0; r < 20; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
      CHECK(s.at(r, c) > 0.0);
      total += s.at(r, c);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("shape mismatch names the primitive and shapes") {
  Tape tape;
  auto a = tape.constant(Tensor({2, 3}));
  auto b = tape.constant(Tensor({4, 3}));
  try {
    (void)matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    CHECK(what.find("matmul") != std::string::npos);
    CHECK(what.find("[2,3]") != std::string::npos);
    CHECK(what.find("[4,3]") != std::string::npos);
  }
  CHECK_THROWS_AS((void)add(a, b), ShapeError);
}

TEST_CASE("grad of simple scalar losses") {
  ParamSet theta;
  theta.add("theta", Tensor::scalar(3.0));
  theta.add("unused", Tensor({2, 2}, 1.0));
  Tape tape;
  auto p = BoundParams::bind(tape, theta);
  auto g = grad(mul(p["theta"], p["theta"]), p);
  CHECK(g.at("theta").item() == 6.0);
  CHECK(g.at("unused") == Tensor({2, 2}, 0.0));
  CHECK(g.congruent(theta));

  Tape t2;
  auto logit = t2.variable(Tensor::matrix(1, 1, {0.0}));
  const std::vector<double> y{1.0};
  auto g2 = t2.gradient(bce_loss(sigmoid(logit), y), std::span(&logit, 1));
  CHECK(g2[0].value().item() == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("non-scalar root is rejected") {
  Tape tape;
  auto x = tape.variable(Tensor({3}, 1.0));
  CHECK_THROWS_AS(tape.gradient(x * x, std::span(&x, 1)), ShapeError);
}

TEST_CASE("every primitive matches central differences, first and second order") {
  Rng rng(17);
  auto one = [](auto fn) { return Primitive([fn](std::span<const Var> v) { return fn(v[0]); }); };
  auto two = [](auto fn) { return Primitive([fn](std::span<const Var> v) { return fn(v[0], v[1]); }); };
  const auto bags = [] {
    auto b = std::make_shared<Bags>();
    const std::vector<std::vector<std::uint32_t>> lists{{0}, {2, 1}, {3, 3, 0}, {1}};
    for (const auto& l : lists) b->push(l);
    return std::shared_ptr<const Bags>(b);
  }();

  struct Case {
    const char* name;
    Primitive op;
    std::vector<Shape> shapes;
    double lo = -2.0;
    double hi = 2.0;
  };
  const std::vector<Case> cases{
      {"add", two([](Var a, Var b) { return a + b; }), {{3, 4}, {3, 4}}},
      {"sub", two([](Var a, Var b) { return a - b; }), {{3, 4}, {3, 4}}},
      {"mul", two([](Var a, Var b) { return a * b; }), {{3, 4}, {3, 4}}},
      {"scale", one([](Var a) { return scale(a, -1.7); }), {{5}}},
      {"add_scalar", one([](Var a) { return add_scalar(a, 0.3); }), {{5}}},
      {"neg", one([](Var a) { return -a; }), {{2, 2}}},
      {"matmul", two([](Var a, Var b) { return matmul(a, b); }), {{3, 4}, {4, 2}}},
      {"matmul_ta", two([](Var a, Var b) { return matmul(a, b, true, false); }), {{4, 3}, {4, 2}}},
      {"matmul_tb", two([](Var a, Var b) { return matmul(a, b, false, true); }), {{3, 4}, {2, 4}}},
      {"add_bias", two([](Var a, Var b) { return add_bias(a, b); }), {{3, 4}, {4}}},
      {"sum_rows", one([](Var a) { return sum_rows(a); }), {{3, 4}}},
      {"broadcast_rows", one([](Var a) { return broadcast_rows(a, 3); }), {{4}}},
      {"row_sum", one([](Var a) { return row_sum(a); }), {{3, 4}}},
      {"broadcast_cols", one([](Var a) { return broadcast_cols(a, 5); }), {{3, 1}}},
      {"relu", one([](Var a) { return relu(a); }), {{4, 4}}},
      {"sigmoid", one([](Var a) { return sigmoid(a); }), {{4, 4}}},
      {"softmax", one([](Var a) { return softmax_rows(a); }), {{3, 5}}},
      {"log", one([](Var a) { return log(a); }), {{6}}, 0.5, 2.0},
      {"reciprocal", one([](Var a) { return reciprocal(a); }), {{6}}, 0.5, 2.0},
      {"clamp", one([](Var a) { return clamp(a, -5.0, 5.0); }), {{6}}},
      {"sum_all", one([](Var a) { return sum_all(a); }), {{3, 2}}},
      {"mean_all", one([](Var a) { return mean_all(a); }), {{3, 2}}},
      {"broadcast_scalar", one([](Var a) { return broadcast_scalar(a, {2, 3}); }), {{1}}},
      {"concat", two([](Var a, Var b) { std::vector<Var> v{a, b}; return concat_cols(v); }), {{3, 2}, {3, 4}}},
      {"slice", one([](Var a) { return slice_cols(a, 1, 2); }), {{3, 4}}},
      {"pad", one([](Var a) { return pad_cols(a, 2, 6); }), {{3, 3}}},
      {"mean_of", two([](Var a, Var b) { std::vector<Var> v{a, b}; return mean_of(v); }), {{2, 3}, {2, 3}}},
      {"embedding_bag", one([bags](Var t) { return embedding_bag(t, bags); }), {{4, 3}}},
      {"scatter_bag", one([bags](Var r) { return scatter_bag(r, bags, 5); }), {{4, 3}}},
      {"bce_mean", one([](Var p) { const std::vector<double> y{1, 0, 1, 0}; return bce_loss(p, y); }), {{4, 1}}, 0.1, 0.9},
      {"bce_sum", one([](Var p) { const std::vector<double> y{1, 0, 0}; return bce_loss(p, y, Reduction::kSum); }), {{3, 1}}, 0.1, 0.9},
      {"sigmoid_of_matmul", two([](Var a, Var b) { return sigmoid(matmul(relu(a), b)); }), {{3, 4}, {4, 2}}},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Tensor> inputs;
      for (const auto& s : c.shapes) inputs.push_back(random_tensor(s, rng, c.lo, c.hi));
      const auto r = check_primitive(c.op, inputs, rng);
      CHECK(r.first < 1e-4);
      CHECK(r.second < 1e-4);
    }
  }
}

TEST_CASE("bce reference values") {
  Tape tape;
  const std::vector<double> one{1.0};
  CHECK(bce_loss(tape.constant(Tensor::matrix(1, 1, {0.5})), one).value().item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce_loss(tape.constant(Tensor::matrix(1, 1, {1.0})), one).value().item() <= 1e-11);
  const std::vector<double> y{1.0, 0.0};
  const double mean = bce_loss(tape.constant(Tensor::matrix(2, 1, {0.9, 0.2})), y).value().item();
  CHECK(mean == doctest::Approx((-std::log(0.9) - std::log(0.8)) / 2.0).epsilon(1e-14));
  const double sum = bce_loss(tape.constant(Tensor::matrix(2, 1, {0.9, 0.2})), y, Reduction::kSum).value().item();
  CHECK(sum == doctest::Approx(-std::log(0.9) - std::log(0.8)).epsilon(1e-14));
  CHECK(bce_loss(tape.constant(Tensor::matrix(1, 1, {0.0})), one).value().all_finite());
}

TEST_CASE("meta_grad scalar toy and degenerate cases") {
  ParamSet theta;
  theta.add("theta", Tensor::scalar(1.0));
  LossFn square = [](Tape&, const BoundParams& p) { return mul(p["theta"], p["theta"]); };
  const auto r = meta_grad(theta, square, square, 0.1);
  // theta_c = 0.8, d/dtheta theta_c^2 = 2 * 0.8 * 0.8
  CHECK(r.grad.at("theta").item() == doctest::Approx(1.28).epsilon(1e-15));
  CHECK(r.loss_a == 1.0);
  CHECK(r.loss_b == doctest::Approx(0.64).epsilon(1e-15));

  const auto zero = meta_grad(theta, square, square, 0.0);
  CHECK(zero.grad.at("theta").item() == 2.0);

  const auto first = meta_grad(theta, square, square, 0.1, MetaOrder::kFirst);
  CHECK(first.grad.at("theta").item() == doctest::Approx(1.6).epsilon(1e-15));
}

TEST_CASE("meta_grad rejects a non-finite inner gradient before the outer pass") {
  ParamSet theta;
  theta.add("w", Tensor::scalar(0.0));
  bool outer_called = false;
  // Finite value (the clamp bound), NaN slope: 0 * d log(w^2) at w = 0.
  LossFn bad = [](Tape&, const BoundParams& p) { return clamp(log(p["w"] * p["w"]), -10.0, 10.0); };
  LossFn outer = [&](Tape&, const BoundParams& p) {
    outer_called = true;
    return p["w"];
  };
  try {
    (void)meta_grad(theta, bad, outer, 0.1);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(!outer_called);
  }
}

TEST_CASE("first and second order agree when the support loss is linear") {
  Rng rng(5);
  ParamSet theta;
  theta.add("a", random_tensor({3, 2}, rng));
  theta.add("b", random_tensor({2}, rng));
  const Tensor c = random_tensor({3, 2}, rng);
  LossFn linear = [&](Tape& tape, const BoundParams& p) { return sum_all(mul(p["a"], tape.constant(c))) + sum_all(p["b"]); };
  LossFn curved = [](Tape&, const BoundParams& p) { return sum_all(mul(sigmoid(p["a"]), p["a"])) + sum_all(mul(p["b"], p["b"])); };
  const auto second = meta_grad(theta, linear, curved, 0.3, MetaOrder::kSecond);
  const auto first = meta_grad(theta, linear, curved, 0.3, MetaOrder::kFirst);
  CHECK(second.grad == first.grad);
  const auto differ = meta_grad(theta, curved, curved, 0.3, MetaOrder::kSecond);
  const auto differ_first = meta_grad(theta, curved, curved, 0.3, MetaOrder::kFirst);
  CHECK(!(differ.grad == differ_first.grad));
}

TEST_CASE("meta_grad matches finite differences of the composed objective for quadratics") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 4;
    const Tensor qa = random_tensor({n, n}, rng), qb = random_tensor({n, n}, rng);
    const Tensor la = random_tensor({1, n}, rng), lb = random_tensor({1, n}, rng);
    auto quad = [](Tape& tape, const Var& x, const Tensor& q, const Tensor& l) {
      return sum_all(mul(matmul(x, tape.constant(q)), x)) + sum_all(mul(x, tape.constant(l)));
    };
    LossFn loss_a = [&](Tape& t, const BoundParams& p) { return quad(t, p["x"], qa, la); };
    LossFn loss_b = [&](Tape& t, const BoundParams& p) { return quad(t, p["x"], qb, lb); };
    const double alpha = 0.1;
    ParamSet theta;
    theta.add("x", random_tensor({1, n}, rng));
    const auto mg = meta_grad(theta, loss_a, loss_b, alpha);

    // F(x) = L_b(x - alpha * grad L_a(x)), grad L_a(x) = x (Q + Q^T) + l
    auto composed = [&](const std::vector<double>& x) {
      std::vector<double> xc(n);
      for (std::size_t j = 0; j < n; ++j) {
        double g = la[j];
        for (std::size_t i = 0; i < n; ++i) g += x[i] * (qa.at(i, j) + qa.at(j, i));
        xc[j] = x[j] - alpha * g;
      }
      double f = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        f += lb[i] * xc[i];
        for (std::size_t j = 0; j < n; ++j) f += xc[i] * qb.at(i, j) * xc[j];
      }
      return f;
    };
    const auto x0 = theta.at("x").data();
    const auto fd = oracle::central_gradient(composed, std::vector<double>(x0.begin(), x0.end()));
    const auto got = mg.grad.at("x").data();
    CHECK(oracle::max_relative_error(std::vector<double>(got.begin(), got.end()), fd, 1e-6) < 1e-4);
  }
}
