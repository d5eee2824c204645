// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

// Hand-rolled generators and independent reference computations shared by the
// unit and acceptance tests. Nothing here calls into the library under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace testsupport {

// xorshift64* stream, deliberately unrelated to the library's generators.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : s_(seed ? seed * 0x2545f4914f6cdd1dULL : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next() {
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545f4914f6cdd1dULL;
  }
  double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
  double real(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  std::vector<double> reals(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto &x : v)
      x = real(lo, hi);
    return v;
  }

private:
  std::uint64_t s_;
};

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Demanded gradient written term by term: (alpha - 1) / (alpha + k) * sum.
inline double oracle_target(const std::vector<double> &q, double alpha) {
  long double sum = 0.0L;
  for (double v : q)
    sum += v;
  return static_cast<double>((static_cast<long double>(alpha) - 1.0L) /
                             (static_cast<long double>(alpha) + q.size()) * sum);
}

// mean^2 + alpha * population variance over history plus candidate.
inline double oracle_objective(const std::vector<double> &q, double candidate, double alpha) {
  std::vector<double> all = q;
  all.push_back(candidate);
  double mean = 0.0;
  for (double v : all)
    mean += v;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (double v : all)
    var += (v - mean) * (v - mean);
  var /= static_cast<double>(all.size());
  return mean * mean + alpha * var;
}

// Golden-section search on a unimodal function.
template <typename F> double golden_min(F f, double lo, double hi, int iters = 200) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int i = 0; i < iters; ++i) {
    if (f(c) < f(d))
      b = d;
    else
      a = c;
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

inline double oracle_anpe(double y, double yhat, double floor) {
  double den = yhat < 0 ? -yhat : yhat;
  if (den < floor)
    den = floor;
  const double diff = y > yhat ? y - yhat : yhat - y;
  return diff / den;
}

inline double oracle_eer(const std::vector<double> &est, const std::vector<double> &act) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const long double d = static_cast<long double>(est[i]) - act[i];
    acc += d * d;
  }
  return static_cast<double>(1.0L - std::sqrt(acc / est.size()));
}

inline double oracle_coverage(const std::vector<double> &vf, const std::vector<double> &ve,
                              const std::vector<double> &actual) {
  std::size_t inside = 0;
  for (std::size_t i = 0; i < vf.size(); ++i)
    if (!(actual[i] < vf[i] - ve[i]) && !(actual[i] > vf[i] + ve[i]))
      ++inside;
  return static_cast<double>(inside) / static_cast<double>(vf.size());
}

inline double oracle_usi(double kbps, double jitter_ms, double rtt_s) {
  return 2.15 * std::log(kbps) - 1.55 * std::log(jitter_ms) - 0.36 * rtt_s;
}

inline double mean_of(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

inline double pop_sd(const std::vector<double> &v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v)
    s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

} // namespace testsupport
