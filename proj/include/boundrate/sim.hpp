// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "boundrate/control.hpp"
#include "boundrate/estimator.hpp"
#include "boundrate/link.hpp"
#include "boundrate/profile.hpp"

namespace boundrate {

enum class ControllerKind { kBounded, kNoRange, kFixedRange, kAimd, kConstant };

/// Accepted forms: bounded, no-range, fixed-range:<kbps>, aimd, constant:<kbps>.
struct ControllerSpec {
  ControllerKind kind = ControllerKind::kBounded;
  double value_kbps = 0.0; // fixed half-width or constant rate

  static ControllerSpec parse(std::string_view text);
  std::string to_string() const;
  bool needs_model() const noexcept;
};

struct SimConfig {
  double slot_ms = 1000.0;
  FilterConfig filter;
  double initial_kbps = 300.0;
  double floor_kbps = kBitrateFloorKbps;
  double cvbr_interval_ms = 1000.0;
  std::size_t switch_window = kSwitchWindow;
  double switch_threshold = kSwitchThreshold;
  /// Scale measured throughput by 1 / (1 - p) where p is the fraction of
  /// packets missing while the path showed no queueing.
  bool loss_compensation = true;
  double quiet_queue_ms = 50.0;
  double aimd_increase_kbps = 50.0;
  double aimd_decrease = 0.85;
  double aimd_gradient_ms = 0.5;
  void validate() const;
};

struct PacketEvent {
  std::uint32_t seq = 0;
  double send_ms = 0.0;
  double recv_ms = 0.0; // receiver clock; meaningless unless delivered
  TransitOutcome outcome = TransitOutcome::kDelivered;
  bool operator==(const PacketEvent &) const = default;
};

struct SlotRecord {
  std::int64_t slot_index = 0;
  double throughput_kbps = 0.0;        // received bits / slot
  double input_throughput_kbps = 0.0;  // after loss compensation
  double capacity_kbps = 0.0;          // mean link capacity over the slot
  double mean_latency_ms = 0.0;        // receiver clock minus sender clock
  double delay_gradient_ms = 0.0;
  double smoothed_gradient_ms = 0.0;
  double demanded_gradient_ms = 0.0;
  double loss_estimate = 0.0;
  std::int64_t packets = 0;
  RatePrediction prediction;
  EncoderConfig commanded; // sender configuration after this slot's feedback
  bool operator==(const SlotRecord &) const = default;
};

struct SessionLog {
  std::string profile;
  std::string controller;
  std::uint64_t seed = 0;
  double duration_ms = 0.0;
  double slot_ms = 0.0;
  double reverse_delay_ms = 0.0;
  double target_delay_ms = 0.0; // first-slot latency, reported only
  std::int64_t packets_sent = 0;
  std::int64_t packets_received = 0;
  std::int64_t random_losses = 0;
  std::int64_t overflow_drops = 0;
  std::int64_t bytes_sent = 0;
  std::int64_t bytes_received = 0;
  std::vector<PacketEvent> packets;
  std::vector<SlotRecord> slots;
  std::vector<FeedbackMessage> feedback;
  bool operator==(const SessionLog &) const = default;
};

/// Runs one closed-loop session for profile.duration_ms. `model` may be null
/// for controllers that do not need one.
SessionLog run_session(const ScenarioProfile &profile, const ControllerSpec &controller,
                       const EstimatorModel *model, std::uint64_t seed,
                       const SimConfig &config = {});

inline constexpr const char *kSlotCsvHeader =
    "slot,throughput_kbps,input_throughput_kbps,capacity_kbps,mean_latency_ms,"
    "delay_gradient_ms,smoothed_gradient_ms,demanded_gradient_ms,loss_estimate,packets,"
    "baseline_kbps,half_width_kbps,min_kbps,target_kbps,max_kbps";

void write_session_csv(std::ostream &out, const SessionLog &log);
/// Summary counters (no per-slot data) as a JSON object.
std::string session_summary_json(const SessionLog &log);

} // namespace boundrate
