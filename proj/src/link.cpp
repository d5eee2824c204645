// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/link.hpp"

#include <algorithm>
#include <cmath>

namespace boundrate {

Link::Link(const ScenarioProfile &profile, std::uint64_t seed)
    : profile_(profile), bandwidth_seed_(derive_seed(seed, 1)),
      loss_rng_(derive_seed(seed, 2)), jitter_rng_(derive_seed(seed, 3)) {}

double Link::capacity_kbps(double t_ms) const {
  return profile_.bandwidth.at(t_ms, bandwidth_seed_);
}

double Link::mean_capacity_kbps(double t0_ms, double t1_ms) const {
  return profile_.bandwidth.mean_over(t0_ms, t1_ms, bandwidth_seed_);
}

int Link::occupancy(double now_ms) const {
  const auto served = std::upper_bound(departures_.begin(), departures_.end(), now_ms);
  return static_cast<int>(departures_.end() - served);
}

TransitResult Link::transit(int size_bytes, double now_ms) {
  TransitResult result;
  while (!departures_.empty() && departures_.front() <= now_ms)
    departures_.pop_front();

  if (loss_rng_.bernoulli(profile_.loss_rate)) {
    result.outcome = TransitOutcome::kRandomLoss;
    return result;
  }
  if (static_cast<int>(departures_.size()) >= profile_.queue_packets) {
    result.outcome = TransitOutcome::kQueueOverflow;
    return result;
  }

  const double start = std::max(now_ms, last_departure_ms_);
  const double service_ms = size_bytes * 8.0 / capacity_kbps(start);
  const double departure = start + service_ms;
  departures_.push_back(departure);
  last_departure_ms_ = departure;

  double extra = 0.0;
  if (profile_.jitter_ms > 0.0)
    extra = std::abs(jitter_rng_.normal()) * profile_.jitter_ms;
  const double arrival =
      std::max(last_arrival_ms_, departure + profile_.base_delay_ms + extra);
  last_arrival_ms_ = arrival;

  result.arrival_ms = arrival;
  result.queueing_ms = start - now_ms;
  return result;
}

} // namespace boundrate
