// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include <cmath>

#include "doctest.h"

#include "../support.hpp"
#include "boundrate/delay.hpp"
#include "boundrate/error.hpp"
#include "boundrate/trace.hpp"

using namespace boundrate;
using testsupport::Gen;

namespace {

std::vector<PacketRecord> packets(const std::vector<double> &send, const std::vector<double> &recv) {
  std::vector<PacketRecord> out;
  for (std::size_t i = 0; i < send.size(); ++i)
    out.push_back({"s", send[i], recv[i], 1500});
  return out;
}

} // namespace

TEST_SUITE("delay") {

TEST_CASE("gradient of the worked three-packet example") {
  const auto p = packets({0, 10, 20}, {100, 112, 125});
  CHECK(*delay_gradient(p) == doctest::Approx(2.5));
}

TEST_CASE("constant one-way delay has zero gradient") {
  const auto p = packets({0, 7, 19, 30}, {55, 62, 74, 85});
  CHECK(*delay_gradient(p) == 0.0);
}

TEST_CASE("fewer than two packets give no gradient") {
  CHECK_FALSE(delay_gradient(packets({}, {})).has_value());
  CHECK_FALSE(delay_gradient(packets({1}, {2})).has_value());
}

TEST_CASE("gradient ignores constant clock offsets on either side") {
  Gen g(3);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> send, recv;
    double t = 0, r = 100;
    const int n = g.integer(2, 30);
    for (int i = 0; i < n; ++i) {
      t += g.real(0.5, 20);
      r = std::max(r, t + 50) + g.real(0, 10);
      send.push_back(t);
      recv.push_back(r);
    }
    const double base = *delay_gradient(packets(send, recv));
    // Power-of-two offsets keep every difference exact.
    for (double off : {512.0, -512.0, 8.0}) {
      auto rs = recv, ss = send;
      for (auto &x : rs)
        x += off;
      CHECK(*delay_gradient(packets(send, rs)) == doctest::Approx(base).epsilon(1e-12));
      for (auto &x : ss)
        x += off;
      CHECK(*delay_gradient(packets(ss, recv)) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient is packet-order by send index") {
  // Oracle: mean over consecutive pairs, computed here directly.
  Gen g(9);
  for (int round = 0; round < 100; ++round) {
    const int n = g.integer(2, 20);
    std::vector<double> send, recv;
    double t = 0;
    for (int i = 0; i < n; ++i) {
      t += g.real(1, 10);
      send.push_back(t);
      recv.push_back(t + g.real(20, 80));
    }
    double acc = 0;
    for (int i = 1; i < n; ++i)
      acc += (recv[i] - recv[i - 1]) - (send[i] - send[i - 1]);
    CHECK(*delay_gradient(packets(send, recv)) == doctest::Approx(acc / (n - 1)).epsilon(1e-12));
  }
}

TEST_CASE("complementary filter") {
  CHECK(smooth_gradient(4, 2, 0.5) == 3.0);
  CHECK(smooth_gradient(4, 2, 0.0) == 4.0);
  CHECK(smooth_gradient(4, 2, 1.0) == 2.0);
  CHECK_THROWS_AS(smooth_gradient(1, 1, 1.5), Error);
}

TEST_CASE("demanded gradient worked examples") {
  const std::vector<double> q{1, 2, 3, 4};
  CHECK(target_gradient(q, 1.2) == doctest::Approx(0.2 / 5.2 * 10).epsilon(1e-14));
  CHECK(target_gradient(std::vector<double>{3, 5}, 0.0) == doctest::Approx(-4.0));
  CHECK(target_gradient(q, 1.0) == 0.0);
  CHECK_THROWS_AS(target_gradient(std::vector<double>{}, 1.2), Error);
}

TEST_CASE("demanded gradient agrees with the term-by-term oracle") {
  Gen g(21);
  for (int round = 0; round < 2000; ++round) {
    const auto q = g.reals(static_cast<std::size_t>(g.integer(1, 16)), -50, 50);
    const double alpha = g.real(0, 4);
    CHECK(testsupport::rel_err(target_gradient(q, alpha), testsupport::oracle_target(q, alpha)) <=
          1e-12);
  }
}

TEST_CASE("demanded gradient is homogeneous in the history") {
  Gen g(22);
  for (int round = 0; round < 500; ++round) {
    auto q = g.reals(8, -10, 10);
    const double alpha = g.real(0, 3);
    const double c = g.real(-5, 5);
    auto scaled = q;
    for (auto &x : scaled)
      x *= c;
    CHECK(target_gradient(scaled, alpha) ==
          doctest::Approx(c * target_gradient(q, alpha)).epsilon(1e-11).scale(1e-9));
  }
}

TEST_CASE("history keeps the most recent k values") {
  GradientHistory h(3);
  for (double v : {1.0, 2.0, 3.0, 4.0})
    h.push(v);
  CHECK(h.size() == 3);
  CHECK(h.values() == std::vector<double>{2, 3, 4});
  CHECK(target_gradient(h, 2.0) == doctest::Approx(1.0 / 5.0 * 9.0));
}

TEST_CASE("filter objective worked examples") {
  CHECK(filter_objective(std::vector<double>{0, 0}, 0, 2.5) == 0.0);
  CHECK(filter_objective(std::vector<double>{2}, 2, 0) == doctest::Approx(4.0));
  CHECK(filter_objective(std::vector<double>{1, -1}, 0, 3) == doctest::Approx(2.0));
}

TEST_CASE("filter objective is non-negative and matches the oracle") {
  Gen g(23);
  for (int round = 0; round < 1000; ++round) {
    const auto q = g.reals(static_cast<std::size_t>(g.integer(1, 10)), -20, 20);
    const double c = g.real(-30, 30);
    const double alpha = g.real(0, 4);
    const double v = filter_objective(q, c, alpha);
    CHECK(v >= 0.0);
    CHECK(v == doctest::Approx(testsupport::oracle_objective(q, c, alpha)).epsilon(1e-10));
  }
}

TEST_CASE("analytic and numeric minimizers agree with an independent search") {
  Gen g(24);
  for (int round = 0; round < 50; ++round) {
    const auto q = g.reals(8, -10, 10);
    const double alpha = g.real(0.1, 3);
    const double golden = testsupport::golden_min(
        [&](double c) { return testsupport::oracle_objective(q, c, alpha); }, -500, 500);
    CHECK(objective_minimizer(q, alpha) == doctest::Approx(golden).epsilon(1e-6).scale(1));
    CHECK(numeric_objective_minimizer(q, alpha) == doctest::Approx(golden).epsilon(1e-6).scale(1));
  }
}

TEST_CASE("filter config validation") {
  FilterConfig c;
  CHECK_NOTHROW(c.validate());
  c.alpha = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c.alpha = 1;
  c.smoothing = 1.1;
  CHECK_THROWS_AS(c.validate(), Error);
}

} // TEST_SUITE delay
