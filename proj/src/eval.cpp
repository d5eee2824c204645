// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/eval.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "boundrate/error.hpp"
#include "json.hpp"

namespace boundrate {
namespace {

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

nlohmann::ordered_json metrics_json(const SessionMetrics &m) {
  nlohmann::ordered_json j;
  j["usi"] = m.usi;
  j["utilization"] = m.utilization;
  j["sigma_t"] = m.sigma_throughput_kbps;
  j["mean_latency"] = m.mean_latency_ms;
  j["sigma_l"] = m.sigma_latency_ms;
  j["mean_bitrate"] = m.mean_bitrate_kbps;
  j["jitter"] = m.jitter_ms;
  j["rtt"] = m.rtt_s;
  return j;
}

} // namespace

double usi(double bitrate_kbps, double jitter_ms, double rtt_s) {
  if (!(bitrate_kbps > 0.0))
    fail(ErrorCode::kInvalidArgument, "usi: bitrate must be positive");
  if (!(jitter_ms > 0.0))
    fail(ErrorCode::kInvalidArgument, "usi: jitter must be positive");
  return 2.15 * std::log(bitrate_kbps) - 1.55 * std::log(jitter_ms) - 0.36 * rtt_s;
}

double utilization(const SessionLog &log) {
  if (log.slots.empty())
    fail(ErrorCode::kInvalidArgument, "utilization: session has no slots");
  double received = 0.0;
  double capacity = 0.0;
  for (const auto &s : log.slots) {
    received += s.throughput_kbps;
    capacity += s.capacity_kbps;
  }
  return capacity > 0.0 ? received / capacity : 0.0;
}

Stability stability(const SessionLog &log) {
  const std::size_t n = log.slots.size();
  if (n < 2)
    fail(ErrorCode::kInvalidArgument, "stability needs at least two slots");
  double mt = 0.0;
  double ml = 0.0;
  for (const auto &s : log.slots) {
    mt += s.throughput_kbps;
    ml += s.mean_latency_ms;
  }
  mt /= static_cast<double>(n);
  ml /= static_cast<double>(n);
  double vt = 0.0;
  double vl = 0.0;
  for (const auto &s : log.slots) {
    vt += (s.throughput_kbps - mt) * (s.throughput_kbps - mt);
    vl += (s.mean_latency_ms - ml) * (s.mean_latency_ms - ml);
  }
  return {std::sqrt(vt / static_cast<double>(n)), ml, std::sqrt(vl / static_cast<double>(n))};
}

SessionMetrics session_metrics(const SessionLog &log) {
  const auto st = stability(log);
  SessionMetrics m;
  m.utilization = utilization(log);
  m.sigma_throughput_kbps = st.sigma_throughput_kbps;
  m.mean_latency_ms = st.mean_latency_ms;
  m.sigma_latency_ms = st.sigma_latency_ms;
  double bitrate = 0.0;
  double jitter = 0.0;
  for (const auto &s : log.slots) {
    bitrate += s.throughput_kbps;
    jitter += std::abs(s.delay_gradient_ms);
  }
  const double n = static_cast<double>(log.slots.size());
  m.mean_bitrate_kbps = bitrate / n;
  m.jitter_ms = std::max(kJitterFloorMs, jitter / n);
  m.rtt_s = (st.mean_latency_ms + log.reverse_delay_ms) / 1000.0;
  m.usi = m.mean_bitrate_kbps > 0.0 ? usi(m.mean_bitrate_kbps, m.jitter_ms, m.rtt_s)
                                    : -std::numeric_limits<double>::infinity();
  return m;
}

SessionMetrics average_metrics(const std::vector<SessionMetrics> &metrics) {
  if (metrics.empty())
    fail(ErrorCode::kInvalidArgument, "nothing to average");
  SessionMetrics a;
  for (const auto &m : metrics) {
    a.usi += m.usi;
    a.utilization += m.utilization;
    a.sigma_throughput_kbps += m.sigma_throughput_kbps;
    a.mean_latency_ms += m.mean_latency_ms;
    a.sigma_latency_ms += m.sigma_latency_ms;
    a.mean_bitrate_kbps += m.mean_bitrate_kbps;
    a.jitter_ms += m.jitter_ms;
    a.rtt_s += m.rtt_s;
  }
  const double n = static_cast<double>(metrics.size());
  a.usi /= n;
  a.utilization /= n;
  a.sigma_throughput_kbps /= n;
  a.mean_latency_ms /= n;
  a.sigma_latency_ms /= n;
  a.mean_bitrate_kbps /= n;
  a.jitter_ms /= n;
  a.rtt_s /= n;
  return a;
}

double symmetric_percent(double a, double b) {
  const double denom = std::abs(a) + std::abs(b);
  return denom == 0.0 ? 0.0 : 200.0 * (a - b) / denom;
}

MetricDelta metric_delta(const NamedMetrics &a, const NamedMetrics &b) {
  MetricDelta d;
  d.name = a.name;
  d.baseline = b.name;
  d.usi_abs = a.metrics.usi - b.metrics.usi;
  d.usi_pct = symmetric_percent(a.metrics.usi, b.metrics.usi);
  d.utilization_abs = a.metrics.utilization - b.metrics.utilization;
  d.utilization_pct = symmetric_percent(a.metrics.utilization, b.metrics.utilization);
  d.mean_latency_abs = a.metrics.mean_latency_ms - b.metrics.mean_latency_ms;
  d.mean_latency_pct = symmetric_percent(a.metrics.mean_latency_ms, b.metrics.mean_latency_ms);
  return d;
}

Report compare_report(const std::vector<NamedMetrics> &entries) {
  if (entries.size() < 2)
    fail(ErrorCode::kInvalidArgument, "a comparison needs at least two entries");
  Report r;
  r.entries = entries;
  for (std::size_t i = 1; i < entries.size(); ++i)
    r.deltas.push_back(metric_delta(entries[i], entries[0]));
  return r;
}

void write_report_csv(std::ostream &out, const Report &report) {
  out << kReportCsvHeader << '\n';
  for (const auto &e : report.entries)
    out << e.name << ',' << num(e.metrics.usi) << ',' << num(e.metrics.utilization) << ','
        << num(e.metrics.sigma_throughput_kbps) << ',' << num(e.metrics.mean_latency_ms) << ','
        << num(e.metrics.sigma_latency_ms) << '\n';
}

std::string report_json(const Report &report) {
  nlohmann::ordered_json j;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto &e : report.entries) {
    nlohmann::ordered_json row;
    row["name"] = e.name;
    row["profile"] = e.profile;
    row["controller"] = e.controller;
    row["seed"] = e.seed;
    row["metrics"] = metrics_json(e.metrics);
    j["entries"].push_back(std::move(row));
  }
  j["deltas"] = nlohmann::ordered_json::array();
  for (const auto &d : report.deltas) {
    nlohmann::ordered_json row;
    row["name"] = d.name;
    row["baseline"] = d.baseline;
    row["usi_abs"] = d.usi_abs;
    row["usi_pct"] = d.usi_pct;
    row["utilization_abs"] = d.utilization_abs;
    row["utilization_pct"] = d.utilization_pct;
    row["mean_latency_abs"] = d.mean_latency_abs;
    row["mean_latency_pct"] = d.mean_latency_pct;
    j["deltas"].push_back(std::move(row));
  }
  return j.dump(2);
}

} // namespace boundrate
