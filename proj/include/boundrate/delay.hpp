// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace boundrate {

struct PacketRecord;

inline constexpr std::size_t kDefaultHistory = 8;

struct FilterConfig {
  double alpha = 1.2;     // aggressiveness weight of the variance term
  double smoothing = 0.9; // complementary-filter weight on the previous value

  void validate() const;
};

/// Bounded FIFO of the most recent smoothed delay gradients (oldest first).
class GradientHistory {
public:
  explicit GradientHistory(std::size_t capacity = kDefaultHistory);

  void push(double gradient_ms);
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return values_.empty(); }
  std::vector<double> values() const { return {values_.begin(), values_.end()}; }

private:
  std::size_t capacity_;
  std::deque<double> values_;
};

/// Mean over consecutive pairs of (t_i - t_{i-1}) - (T_i - T_{i-1}), where T
/// is the send time and t the receive time. Packets are taken in send order.
/// Returns nullopt with fewer than two packets.
std::optional<double> delay_gradient(std::span<const PacketRecord> packets);

/// coefficient * previous + (1 - coefficient) * raw.
double smooth_gradient(double raw_ms, double previous_smoothed_ms, double coefficient);

/// Demanded next-slot gradient: (alpha - 1) / (alpha + k) * sum(history).
double target_gradient(std::span<const double> history, double alpha);
double target_gradient(const GradientHistory &history, double alpha);

/// mean^2 + alpha * variance over the history values plus the candidate
/// (population moments over k + 1 values).
double filter_objective(std::span<const double> history, double candidate, double alpha);

/// Stationary point of filter_objective in the candidate:
/// (alpha - 1) * sum(history) / (alpha * k + 1).
double objective_minimizer(std::span<const double> history, double alpha);

/// Minimizes filter_objective numerically (Brent's method on a bracket
/// around the history). Diagnostic only.
double numeric_objective_minimizer(std::span<const double> history, double alpha);

} // namespace boundrate
