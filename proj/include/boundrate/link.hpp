// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstdint>
#include <deque>

#include "boundrate/profile.hpp"
#include "boundrate/random.hpp"

namespace boundrate {

inline constexpr int kMtuBytes = 1500;

enum class TransitOutcome { kDelivered, kRandomLoss, kQueueOverflow };

struct TransitResult {
  TransitOutcome outcome = TransitOutcome::kDelivered;
  double arrival_ms = 0.0;  // true (sender-clock) time at the receiver
  double queueing_ms = 0.0; // wait before service started
};

/// Single FIFO drop-tail bottleneck.
///
/// Packets must be offered in non-decreasing time order. Random loss is
/// applied before the queue (lost packets consume no capacity); a packet that
/// finds `queue_packets` packets in the system is dropped. Service time is
/// size / capacity, with capacity sampled when service starts. Propagation
/// adds the base delay plus optional non-negative jitter that never reorders
/// packets.
class Link {
public:
  Link(const ScenarioProfile &profile, std::uint64_t seed);

  TransitResult transit(int size_bytes, double now_ms);

  /// Packets queued or in service at `now_ms` (does not advance state).
  int occupancy(double now_ms) const;
  double capacity_kbps(double t_ms) const;
  /// Time-averaged capacity over [t0, t1).
  double mean_capacity_kbps(double t0_ms, double t1_ms) const;

private:
  const ScenarioProfile &profile_;
  std::uint64_t bandwidth_seed_;
  Rng loss_rng_;
  Rng jitter_rng_;
  std::deque<double> departures_; // departure times of packets in the system
  double last_departure_ms_ = 0.0;
  double last_arrival_ms_ = 0.0;
};

} // namespace boundrate
