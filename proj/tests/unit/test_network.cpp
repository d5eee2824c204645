// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include <cmath>
#include <functional>

#include "doctest.h"

#include "../support.hpp"
#include "boundrate/error.hpp"
#include "boundrate/network.hpp"

using namespace boundrate;
using namespace boundrate::nn;
using testsupport::Gen;

namespace {

Tensor random_tensor(Gen &g, Shape shape, double lo = -1, double hi = 1) {
  Tensor t(std::move(shape));
  for (auto &v : t.values())
    v = g.real(lo, hi);
  return t;
}

void randomize(Network &net, Gen &g, double scale = 0.5) {
  for (auto &p : net.params())
    for (auto &v : p.value.values())
      v = g.real(-scale, scale);
}

// Weighted sum of outputs plus a quadratic term; weights fixed per call site.
LossFn weighted_loss(const Tensor &weights) {
  return [weights](const Tensor &out, Tensor &grad) {
    grad = Tensor(out.shape());
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      loss += weights[i] * out[i] + 0.5 * out[i] * out[i];
      grad[i] = weights[i] + out[i];
    }
    return loss;
  };
}

// Central differences computed here, independent of the library's checker.
double fd_max_rel_error(Network &net, const Tensor &input, const LossFn &loss, double eps) {
  auto acts = net.forward(input);
  Tensor grad_out;
  loss(acts.output(), grad_out);
  auto grads = net.zero_gradients();
  net.backward(acts, grad_out, grads);
  auto eval = [&] {
    Tensor unused;
    return loss(net.forward(input).output(), unused);
  };
  double worst = 0.0;
  for (std::size_t p = 0; p < net.params().size(); ++p) {
    auto &values = net.params()[p].value;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double keep = values[i];
      values[i] = keep + eps;
      const double up = eval();
      values[i] = keep - eps;
      const double down = eval();
      values[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = grads[p][i];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
  }
  return worst;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

TEST_SUITE("neuralnet") {

TEST_CASE("zero parameters give zero output") {
  Network net("n", {5}, {LayerSpec::dense(3), LayerSpec::relu(), LayerSpec::dense(2)}, 1);
  for (auto &p : net.params())
    p.value.fill(0.0);
  const auto out = net.forward(Tensor({5}, 0.7)).output();
  CHECK(out == Tensor({2}, 0.0));
}

TEST_CASE("identity dense layer passes its input through") {
  Network net("n", {4}, {LayerSpec::dense(4)}, 1);
  auto &w = net.params()[0].value;
  w.fill(0.0);
  for (std::size_t i = 0; i < 4; ++i)
    w.at(i, i) = 1.0;
  net.params()[1].value.fill(0.0);
  const Tensor x({4}, std::vector<double>{1.5, -2, 0, 3.25});
  CHECK(net.forward(x).output() == x);
}

TEST_CASE("dense forward matches a hand-written affine map") {
  Gen g(1);
  Network net("n", {6}, {LayerSpec::dense(3)}, 5);
  randomize(net, g);
  const auto x = random_tensor(g, {6});
  const auto &w = net.params()[0].value;
  const auto &b = net.params()[1].value;
  const auto y = net.forward(x).output();
  for (std::size_t o = 0; o < 3; ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < 6; ++i)
      acc += w.at(o, i) * x[i];
    CHECK(y[o] == doctest::Approx(acc).epsilon(1e-14));
  }
}

TEST_CASE("valid convolution shortens length 8 by kernel 3 to 6") {
  Network net("n", {8, 2}, {LayerSpec::conv1d(4, 3, 1)}, 1);
  CHECK(net.output_shape() == Shape{6, 4});
  Network strided("n", {8, 1}, {LayerSpec::conv1d(2, 3, 2)}, 1);
  CHECK(strided.output_shape() == Shape{3, 2});
}

TEST_CASE("convolution forward matches direct summation") {
  Gen g(2);
  Network net("n", {7, 3}, {LayerSpec::conv1d(2, 3, 2)}, 1);
  randomize(net, g);
  const auto x = random_tensor(g, {7, 3});
  const auto &w = net.params()[0].value; // [F, width, C]
  const auto &b = net.params()[1].value;
  const auto y = net.forward(x).output();
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t f = 0; f < 2; ++f) {
      double acc = b[f];
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t c = 0; c < 3; ++c)
          acc += w[(f * 3 + j) * 3 + c] * x[(t * 2 + j) * 3 + c];
      CHECK(y[t * 2 + f] == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("GRU over zeros follows its bias terms alone") {
  Gen g(3);
  const std::size_t H = 3, T = 4;
  Network net("n", {T, 2}, {LayerSpec::gru(H, true)}, 1);
  randomize(net, g, 0.8);
  const auto &wh = net.params()[1].value;
  const auto &bx = net.params()[2].value;
  const auto &bh = net.params()[3].value;
  const auto y = net.forward(Tensor({T, 2}, 0.0)).output();
  std::vector<double> h(H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> next(H);
    for (std::size_t u = 0; u < H; ++u) {
      auto hid = [&](std::size_t gate) {
        double a = bh[gate * H + u];
        for (std::size_t c = 0; c < H; ++c)
          a += wh.at(gate * H + u, c) * h[c];
        return a;
      };
      const double r = sigmoid(bx[u] + hid(0));
      const double z = sigmoid(bx[H + u] + hid(1));
      const double n = std::tanh(bx[2 * H + u] + r * hid(2));
      next[u] = (1 - z) * n + z * h[u];
    }
    h = next;
    for (std::size_t u = 0; u < H; ++u)
      CHECK(y[t * H + u] == doctest::Approx(h[u]).epsilon(1e-14));
  }
}

TEST_CASE("GRU last-state output equals the final row of the sequence output") {
  Gen g(4);
  Network seq("n", {5, 2}, {LayerSpec::gru(3, true)}, 9);
  Network last("n", {5, 2}, {LayerSpec::gru(3, false)}, 9);
  const auto x = random_tensor(g, {5, 2});
  const auto a = seq.forward(x).output();
  const auto b = last.forward(x).output();
  for (std::size_t u = 0; u < 3; ++u)
    CHECK(b[u] == a[4 * 3 + u]);
}

TEST_CASE("select, flatten and merge route values") {
  Network net("n", {5},
              {LayerSpec::merge({{LayerSpec::select({4, 0}, {2, 1}), LayerSpec::flatten()},
                                 {LayerSpec::select({2}, {1})}})},
              1);
  CHECK(net.params().size() == 0);
  const Tensor x({5}, std::vector<double>{10, 11, 12, 13, 14});
  CHECK(net.forward(x).output().values()[0] == 14);
  CHECK(net.forward(x).output().values()[1] == 10);
  CHECK(net.forward(x).output().values()[2] == 12);
}

TEST_CASE("parameter names follow the layer path") {
  Network net("trunk", {4},
              {LayerSpec::merge({{LayerSpec::dense(2)}, {LayerSpec::select({0}, {1})}}),
               LayerSpec::dense(1)},
              1);
  REQUIRE(net.params().size() == 4);
  CHECK(net.params()[0].name == "trunk.0.merge.0.0.dense.w");
  CHECK(net.params()[1].name == "trunk.0.merge.0.0.dense.b");
  CHECK(net.params()[2].name == "trunk.1.dense.w");
}

TEST_CASE("shape mismatches name the offending layer") {
  Network net("n", {4}, {LayerSpec::dense(2)}, 1);
  try {
    net.forward(Tensor({5}));
    FAIL("expected a shape error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kShape);
    CHECK(std::string(e.what()).find("n.0") != std::string::npos);
  }
  CHECK_THROWS_AS(Network("n", {2, 1}, {LayerSpec::conv1d(1, 3)}, 1), Error);
}

TEST_CASE("stale activations are refused by backward") {
  Network a("n", {4}, {LayerSpec::dense(2)}, 1);
  Network b("n", {3}, {LayerSpec::dense(2)}, 1);
  auto acts = b.forward(Tensor({3}, 1.0));
  auto grads = a.zero_gradients();
  CHECK_THROWS_AS(a.backward(acts, Tensor({2}, 1.0), grads), Error);
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
  Gen g(5);
  Network net("n", {6, 2}, {LayerSpec::gru(3, true), LayerSpec::conv1d(2, 2), LayerSpec::dense(2)}, 3);
  auto acts = net.forward(random_tensor(g, {6, 2}));
  auto grads = net.zero_gradients();
  net.backward(acts, Tensor(net.output_shape(), 0.0), grads);
  for (const auto &t : grads)
    for (double v : t.values())
      CHECK(v == 0.0);
}

TEST_CASE("single dense layer weight gradient is the outer product") {
  Gen g(6);
  Network net("n", {3}, {LayerSpec::dense(2)}, 1);
  const auto x = random_tensor(g, {3});
  const auto go = random_tensor(g, {2});
  auto acts = net.forward(x);
  auto grads = net.zero_gradients();
  net.backward(acts, go, grads);
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(grads[0].at(o, i) == doctest::Approx(go[o] * x[i]).epsilon(1e-15));
    CHECK(grads[1][o] == go[o]);
  }
}

TEST_CASE("every layer kind matches central differences") {
  Gen g(7);
  struct Case {
    const char *label;
    Shape in;
    std::vector<LayerSpec> layers;
  };
  const std::vector<Case> cases{
      {"dense", {5}, {LayerSpec::dense(4)}},
      {"dense-relu-dense", {5}, {LayerSpec::dense(6), LayerSpec::relu(), LayerSpec::dense(3)}},
      {"conv1d", {7, 2}, {LayerSpec::conv1d(3, 3, 1)}},
      {"conv1d-strided", {9, 1}, {LayerSpec::conv1d(2, 3, 2), LayerSpec::flatten()}},
      {"gru-sequences", {5, 2}, {LayerSpec::gru(3, true)}},
      {"gru-last", {5, 3}, {LayerSpec::gru(4, false)}},
      {"stacked-gru", {4, 2}, {LayerSpec::gru(3, true), LayerSpec::gru(3, false)}},
      {"select-conv", {10}, {LayerSpec::select({0, 2, 4, 6, 8}, {5, 1}), LayerSpec::conv1d(2, 3), LayerSpec::relu(), LayerSpec::flatten(), LayerSpec::dense(2)}},
      {"merge", {9},
       {LayerSpec::merge({{LayerSpec::select({0, 1, 2, 3}, {4, 1}), LayerSpec::conv1d(2, 2),
                           LayerSpec::flatten()},
                          {LayerSpec::select({4, 5, 6, 7}, {2, 2}), LayerSpec::gru(3, false)},
                          {LayerSpec::select({8}, {1})}}),
        LayerSpec::dense(3)}},
  };
  for (const auto &c : cases) {
    CAPTURE(c.label);
    for (int round = 0; round < 20; ++round) {
      Network net("n", c.in, c.layers, static_cast<std::uint64_t>(round + 1));
      randomize(net, g);
      const auto x = random_tensor(g, c.in);
      const auto w = random_tensor(g, net.output_shape());
      CHECK(fd_max_rel_error(net, x, weighted_loss(w), 1e-5) <= 1e-4);
    }
  }
}

TEST_CASE("library checker agrees on a linear network with quadratic loss") {
  Gen g(8);
  Network net("n", {4}, {LayerSpec::dense(3), LayerSpec::dense(2)}, 1);
  const auto x = random_tensor(g, {4});
  const auto w = random_tensor(g, {2});
  CHECK(gradient_check(net, x, weighted_loss(w), 1e-4) < 1e-7);
  Network empty("n", {3}, {LayerSpec::relu()}, 1);
  CHECK(gradient_check(empty, Tensor({3}, 1.0), weighted_loss(Tensor({3}, 1.0)), 1e-4) == 0.0);
}

TEST_CASE("sgd step arithmetic and frozen tensors") {
  ParamSet ps;
  ps.add("a", Tensor({1}, 1.0));
  ps.add("b", Tensor({1}, 1.0), false);
  Gradients g{Tensor({1}, 2.0), Tensor({1}, 2.0)};
  sgd_step(ps, g, 0.5);
  CHECK(ps[0].value[0] == 0.0);
  CHECK(ps[1].value[0] == 1.0);
  Gradients zero{Tensor({1}, 0.0), Tensor({1}, 0.0)};
  sgd_step(ps, zero, 0.5);
  CHECK(ps[0].value[0] == 0.0);
}

TEST_CASE("backward leaves frozen tensors with zero gradient") {
  Gen g(9);
  Network net("n", {4}, {LayerSpec::dense(3), LayerSpec::relu(), LayerSpec::dense(2)}, 1);
  net.params()[0].trainable = false;
  auto acts = net.forward(random_tensor(g, {4}));
  auto grads = net.zero_gradients();
  net.backward(acts, random_tensor(g, {2}), grads);
  for (double v : grads[0].values())
    CHECK(v == 0.0);
}

TEST_CASE("same seed gives identical parameters and outputs") {
  Gen g(10);
  const std::vector<LayerSpec> layers{LayerSpec::gru(4, true), LayerSpec::conv1d(3, 2),
                                      LayerSpec::flatten(), LayerSpec::dense(2)};
  Network a("n", {6, 2}, layers, 42), b("n", {6, 2}, layers, 42), c("n", {6, 2}, layers, 43);
  CHECK(a.params() == b.params());
  CHECK_FALSE(a.params() == c.params());
  const auto x = random_tensor(g, {6, 2});
  CHECK(a.forward(x).output() == b.forward(x).output());
}

TEST_CASE("initial weights respect the fan-in bound and biases start at zero") {
  Network net("n", {16}, {LayerSpec::dense(8), LayerSpec::dense(4)}, 3);
  const double bound = 1.0 / std::sqrt(16.0);
  for (double v : net.params()[0].value.values())
    CHECK(std::abs(v) <= bound);
  for (double v : net.params()[1].value.values())
    CHECK(v == 0.0);
}

TEST_CASE("rebuilding from parts validates names and shapes") {
  Network net("n", {4}, {LayerSpec::dense(2)}, 1);
  const auto rebuilt = Network::from_parts("n", {4}, {LayerSpec::dense(2)}, net.params());
  CHECK(rebuilt.params() == net.params());
  CHECK_THROWS_AS(Network::from_parts("n", {5}, {LayerSpec::dense(2)}, net.params()), Error);
  CHECK_THROWS_AS(Network::from_parts("m", {4}, {LayerSpec::dense(2)}, net.params()), Error);
}

} // TEST_SUITE neuralnet
