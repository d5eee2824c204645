// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "boundrate/sim.hpp"

namespace boundrate {

/// Floor applied to the jitter term so a perfectly smooth session keeps a
/// finite USI.
inline constexpr double kJitterFloorMs = 1e-3;

/// 2.15 ln(kbps) - 1.55 ln(jitter ms) - 0.36 rtt seconds.
double usi(double bitrate_kbps, double jitter_ms, double rtt_s);

/// Mean received throughput over mean link capacity across the logged slots.
double utilization(const SessionLog &log);

struct Stability {
  double sigma_throughput_kbps = 0.0;
  double mean_latency_ms = 0.0;
  double sigma_latency_ms = 0.0;
};
/// Population moments of per-slot throughput and latency; needs >= 2 slots.
Stability stability(const SessionLog &log);

struct SessionMetrics {
  double usi = 0.0;
  double utilization = 0.0;
  double sigma_throughput_kbps = 0.0;
  double mean_latency_ms = 0.0;
  double sigma_latency_ms = 0.0;
  double mean_bitrate_kbps = 0.0;
  double jitter_ms = 0.0;
  double rtt_s = 0.0;
};

/// Bitrate is mean received throughput; jitter is the mean absolute slot
/// delay gradient (floored); RTT is mean forward latency plus the reverse
/// path delay.
SessionMetrics session_metrics(const SessionLog &log);
/// Elementwise mean.
SessionMetrics average_metrics(const std::vector<SessionMetrics> &metrics);

struct NamedMetrics {
  std::string name;
  SessionMetrics metrics;
  std::string profile;
  std::string controller;
  std::uint64_t seed = 0;
};

struct MetricDelta {
  std::string name;
  std::string baseline;
  double usi_abs = 0.0;
  double usi_pct = 0.0;
  double utilization_abs = 0.0;
  double utilization_pct = 0.0;
  double mean_latency_abs = 0.0;
  double mean_latency_pct = 0.0;
};

/// 200 (a - b) / (|a| + |b|); 0 when both are 0.
double symmetric_percent(double a, double b);

struct Report {
  std::vector<NamedMetrics> entries;
  std::vector<MetricDelta> deltas; // every entry against the first one
};

/// Needs at least two entries; deltas compare each later entry with the
/// first.
Report compare_report(const std::vector<NamedMetrics> &entries);
MetricDelta metric_delta(const NamedMetrics &a, const NamedMetrics &b);

inline constexpr const char *kReportCsvHeader =
    "name,usi,utilization,sigma_t,mean_latency,sigma_l";
void write_report_csv(std::ostream &out, const Report &report);
std::string report_json(const Report &report);

} // namespace boundrate
