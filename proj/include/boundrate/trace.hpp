// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boundrate/profile.hpp"

namespace boundrate {

/// One received packet. Times are milliseconds on the respective clocks.
struct PacketRecord {
  std::string session_id;
  double send_time_ms = 0.0;
  double recv_time_ms = 0.0;
  std::int64_t size_bytes = 0;

  bool operator==(const PacketRecord &) const = default;
};

/// Per-slot receiver observation.
struct SlotObservation {
  std::int64_t slot_index = 0;
  double throughput_kbps = 0.0;   // received bits / slot duration
  double delay_gradient_ms = 0.0; // carried forward when the slot has < 2 packets
  std::int64_t packet_count = 0;
  std::int64_t bytes = 0;
  bool gradient_measured = false;
};

inline constexpr const char *kTraceHeader = "session_id,send_time_ms,recv_time_ms,size_bytes";

/// Reads the CSV trace format. The header line is optional; lines starting
/// with `#` and blank lines are skipped. Any malformed line rejects the whole
/// stream with an Error naming the line number.
std::vector<PacketRecord> parse_trace(std::istream &in);
std::vector<PacketRecord> load_trace(const std::string &path);

/// Writes the header and one row per record using shortest round-trip
/// formatting, so parse_trace(write_trace(r)) == r.
void write_trace(std::ostream &out, std::span<const PacketRecord> records);
void save_trace(const std::string &path, std::span<const PacketRecord> records);

/// Summarizes the packets that landed in one slot.
SlotObservation observe_slot(std::span<const PacketRecord> packets, std::int64_t slot_index,
                             double slot_ms, double previous_gradient_ms);

/// Partitions records (sorted by recv_time) into slots
/// [origin + i*slot, origin + (i+1)*slot). The origin defaults to the first
/// record's recv_time so that a constant receiver clock offset leaves the
/// partition unchanged.
std::vector<SlotObservation> slot_packets(std::span<const PacketRecord> records, double slot_ms,
                                          std::optional<double> origin_ms = std::nullopt);

struct SynthTrace {
  std::vector<PacketRecord> records; // received packets only, in arrival order
  std::int64_t packets_sent = 0;
  std::int64_t random_losses = 0;
  std::int64_t overflow_drops = 0;
};

/// Synthesizes a trace by pacing MTU packets through the profile's link at
/// the capacity seen `sender_lag_ms` earlier, scaled by the profile's probe
/// factor.
/// Deterministic for fixed (profile, seed, duration).
SynthTrace synth_trace_detailed(const ScenarioProfile &profile, std::uint64_t seed,
                                double duration_ms);
std::vector<PacketRecord> synth_trace(const ScenarioProfile &profile, std::uint64_t seed,
                                      double duration_ms);

} // namespace boundrate
