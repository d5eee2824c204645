// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/delay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "boundrate/error.hpp"
#include "boundrate/trace.hpp"

namespace boundrate {

void FilterConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::kInvalidArgument, "filter alpha must be finite and >= 0");
  if (!(smoothing >= 0.0 && smoothing <= 1.0))
    fail(ErrorCode::kInvalidArgument, "smoothing coefficient must lie in [0, 1]");
}

GradientHistory::GradientHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0)
    fail(ErrorCode::kInvalidArgument, "gradient history capacity must be positive");
}

void GradientHistory::push(double gradient_ms) {
  if (!std::isfinite(gradient_ms))
    fail(ErrorCode::kNumeric, "non-finite delay gradient");
  values_.push_back(gradient_ms);
  if (values_.size() > capacity_)
    values_.pop_front();
}

std::optional<double> delay_gradient(std::span<const PacketRecord> packets) {
  if (packets.size() < 2)
    return std::nullopt;
  // Send order; stable so equal send times keep arrival order.
  std::vector<const PacketRecord *> order;
  order.reserve(packets.size());
  bool sorted = true;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    order.push_back(&packets[i]);
    if (i > 0 && packets[i].send_time_ms < packets[i - 1].send_time_ms)
      sorted = false;
  }
  if (!sorted)
    std::stable_sort(order.begin(), order.end(), [](const auto *a, const auto *b) {
      return a->send_time_ms < b->send_time_ms;
    });
  double sum = 0.0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const double recv_delta = order[i]->recv_time_ms - order[i - 1]->recv_time_ms;
    const double send_delta = order[i]->send_time_ms - order[i - 1]->send_time_ms;
    sum += recv_delta - send_delta;
  }
  return sum / static_cast<double>(order.size() - 1);
}

double smooth_gradient(double raw_ms, double previous_smoothed_ms, double coefficient) {
  if (!(coefficient >= 0.0 && coefficient <= 1.0))
    fail(ErrorCode::kInvalidArgument, "smoothing coefficient must lie in [0, 1]");
  return coefficient * previous_smoothed_ms + (1.0 - coefficient) * raw_ms;
}

double target_gradient(std::span<const double> history, double alpha) {
  const double k = static_cast<double>(history.size());
  if (alpha + k == 0.0)
    fail(ErrorCode::kInvalidArgument, "delay filter needs a non-empty history when alpha is 0");
  if (history.empty())
    fail(ErrorCode::kInvalidArgument, "delay filter needs a non-empty history");
  // Neumaier summation: histories of mixed-sign gradients often nearly cancel.
  double sum = 0.0;
  double carry = 0.0;
  for (double q : history) {
    const double t = sum + q;
    carry += std::abs(sum) >= std::abs(q) ? (sum - t) + q : (q - t) + sum;
    sum = t;
  }
  return (alpha - 1.0) / (alpha + k) * (sum + carry);
}

double target_gradient(const GradientHistory &history, double alpha) {
  const auto values = history.values();
  return target_gradient(values, alpha);
}

double filter_objective(std::span<const double> history, double candidate, double alpha) {
  if (history.empty())
    fail(ErrorCode::kInvalidArgument, "filter objective needs a non-empty history");
  const double n = static_cast<double>(history.size() + 1);
  const double mean =
      (std::accumulate(history.begin(), history.end(), 0.0) + candidate) / n;
  double sq = (candidate - mean) * (candidate - mean);
  for (double q : history)
    sq += (q - mean) * (q - mean);
  return mean * mean + alpha * (sq / n);
}

double objective_minimizer(std::span<const double> history, double alpha) {
  if (history.empty())
    fail(ErrorCode::kInvalidArgument, "filter objective needs a non-empty history");
  const double k = static_cast<double>(history.size());
  const double sum = std::accumulate(history.begin(), history.end(), 0.0);
  return (alpha - 1.0) * sum / (alpha * k + 1.0);
}

double numeric_objective_minimizer(std::span<const double> history, double alpha) {
  if (history.empty())
    fail(ErrorCode::kInvalidArgument, "filter objective needs a non-empty history");
  // |minimizer| <= |alpha - 1| * k * max|q| / (alpha * k + 1) <= (k + 1) * max|q|.
  double largest = 0.0;
  for (double q : history)
    largest = std::max(largest, std::abs(q));
  const double span = 2.0 * (static_cast<double>(history.size()) + 1.0) * largest + 1.0;
  auto f = [&](double x) { return filter_objective(history, x, alpha); };
  const auto [x, fx] =
      boost::math::tools::brent_find_minima(f, -span, span, std::numeric_limits<double>::digits / 2);
  (void)fx;
  return x;
}

} // namespace boundrate
