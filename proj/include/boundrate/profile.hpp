// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace boundrate {

enum class BandwidthKind { kConstant, kStep, kSinusoid, kTrace };

/// Link capacity over time in kbps (equivalently bits per millisecond).
///
/// The value is piecewise constant over `update_ms` intervals: the
/// deterministic shape (constant, step, sinusoid or trace samples) is
/// evaluated at the interval start and then multiplied by a per-interval
/// noise factor and an occasional fade. Noise and fades are pure functions of
/// (seed, interval index), so any time can be queried in any order.
struct BandwidthProcess {
  BandwidthKind kind = BandwidthKind::kConstant;
  double mean_kbps = 1000.0;
  double amplitude_kbps = 0.0;
  double period_ms = 60000.0;
  double phase_rad = 0.0;
  std::vector<std::pair<double, double>> steps;   // (start_ms, kbps)
  std::vector<std::pair<double, double>> samples; // (time_ms, kbps)
  std::string trace_file;
  double noise = 0.0;            // relative std-dev per interval
  double fade_probability = 0.0; // per interval
  double fade_depth = 0.0;       // max fractional capacity loss of a fade
  double update_ms = 1000.0;

  double at(double t_ms, std::uint64_t seed) const;
  /// Time average over [t0, t1), integrating the piecewise-constant value.
  double mean_over(double t0_ms, double t1_ms, std::uint64_t seed) const;

private:
  double shape(double t_ms) const;
};

/// Declarative network scenario.
struct ScenarioProfile {
  std::string name = "custom";
  BandwidthProcess bandwidth;
  double base_delay_ms = 50.0;
  double jitter_ms = 0.0;
  int queue_packets = 100;
  double loss_rate = 0.0;
  double clock_offset_ms = 0.0;
  double duration_ms = 300000.0;
  /// Synthetic-trace sender: paces at the capacity observed this long ago.
  double sender_lag_ms = 200.0;
  /// Synthetic-trace sender: the lagged capacity is scaled by a factor drawn
  /// uniformly from [sender_probe_min, sender_probe_max] every
  /// sender_probe_ms. The default range of exactly 1 saturates the link.
  double sender_probe_min = 1.0;
  double sender_probe_max = 1.0;
  double sender_probe_ms = 1000.0;

  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
ScenarioProfile parse_profile(std::istream &in, const std::string &origin = "<stream>");
ScenarioProfile load_profile(const std::string &path);
/// Built-in profiles: wired, wifi, lte, very-bad-network, emulator-4mbps,
/// train-sinusoid, train-explore, constant-500.
ScenarioProfile named_profile(const std::string &name);
std::vector<std::string> named_profile_names();
/// Resolves a built-in name first, then a file path.
ScenarioProfile resolve_profile(const std::string &name_or_path);
/// Canonical text form; parse_profile(serialize_profile(p)) reproduces p.
std::string serialize_profile(const ScenarioProfile &profile);
/// Applies a single `key = value` override.
void set_profile_value(ScenarioProfile &profile, const std::string &key,
                       const std::string &value);

} // namespace boundrate
