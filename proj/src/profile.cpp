// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "boundrate/error.hpp"
#include "boundrate/random.hpp"

namespace boundrate {
namespace {

constexpr double kMinCapacityKbps = 8.0;

double hash_unit(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  return unit_from_bits(splitmix64(derive_seed(seed, stream) ^ splitmix64(index)));
}

double hash_normal(std::uint64_t seed, std::uint64_t index) {
  double u1 = hash_unit(seed, index, 11);
  if (u1 <= 0.0)
    u1 = 0x1.0p-53;
  const double u2 = hash_unit(seed, index, 12);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &value) {
  double out = 0.0;
  const auto *first = value.data();
  const auto *last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out))
    fail(ErrorCode::kParse, "profile key '" + key + "': not a number: '" + value + "'");
  return out;
}

// "4000@0, 2000@60000" -> [(0, 4000), (60000, 2000)]
std::vector<std::pair<double, double>> parse_steps(const std::string &key,
                                                   const std::string &value) {
  std::vector<std::pair<double, double>> steps;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      continue;
    const auto at = item.find('@');
    if (at == std::string::npos)
      fail(ErrorCode::kParse, "profile key '" + key + "': expected kbps@start_ms, got '" +
                                  item + "'");
    steps.emplace_back(to_double(key, trim(item.substr(at + 1))),
                       to_double(key, trim(item.substr(0, at))));
  }
  std::sort(steps.begin(), steps.end());
  return steps;
}

std::vector<std::pair<double, double>> load_bandwidth_samples(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::kIo, "cannot open bandwidth trace '" + path + "'");
  std::vector<std::pair<double, double>> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line.rfind("time_ms", 0) == 0)
      continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      fail(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": expected time_ms,kbps");
    samples.emplace_back(to_double("time_ms", trim(line.substr(0, comma))),
                         to_double("kbps", trim(line.substr(comma + 1))));
  }
  std::sort(samples.begin(), samples.end());
  return samples;
}

const char *kind_name(BandwidthKind kind) {
  switch (kind) {
  case BandwidthKind::kConstant:
    return "constant";
  case BandwidthKind::kStep:
    return "step";
  case BandwidthKind::kSinusoid:
    return "sinusoid";
  case BandwidthKind::kTrace:
    return "trace";
  }
  return "constant";
}

const std::map<std::string, std::string> &builtin_profiles() {
  static const std::map<std::string, std::string> profiles = {
      {"wired", R"(# Stable wired access link.
name = wired
bandwidth = constant
bandwidth_kbps = 4000
noise = 0.02
update_ms = 1000
base_delay_ms = 20
queue_packets = 100
loss_rate = 0.001
)"},
      {"wifi", R"(# Shared Wi-Fi: slow capacity swings plus short fades.
name = wifi
bandwidth = sinusoid
bandwidth_kbps = 3000
amplitude_kbps = 600
period_ms = 40000
noise = 0.05
fade_probability = 0.05
fade_depth = 0.4
update_ms = 500
base_delay_ms = 30
jitter_ms = 2
queue_packets = 80
loss_rate = 0.02
)"},
      {"lte", R"(# Cellular: wide capacity swings, deeper fades, longer path.
name = lte
bandwidth = sinusoid
bandwidth_kbps = 2000
amplitude_kbps = 800
period_ms = 60000
noise = 0.08
fade_probability = 0.05
fade_depth = 0.5
update_ms = 500
base_delay_ms = 60
jitter_ms = 5
queue_packets = 120
loss_rate = 0.01
)"},
      {"very-bad-network", R"(# 1 Mbps, 10% loss, 500 ms latency.
name = very-bad-network
bandwidth = constant
bandwidth_kbps = 1000
update_ms = 1000
base_delay_ms = 500
queue_packets = 50
loss_rate = 0.1
)"},
      {"emulator-4mbps", R"(# Fixed 4 Mbps, 10% loss, 100 ms latency.
name = emulator-4mbps
bandwidth = constant
bandwidth_kbps = 4000
update_ms = 1000
base_delay_ms = 100
queue_packets = 100
loss_rate = 0.1
)"},
      {"train-sinusoid", R"(# Training corpus: sinusoidal capacity, faint noise, rare deep fades.
name = train-sinusoid
bandwidth = sinusoid
bandwidth_kbps = 1500
amplitude_kbps = 500
period_ms = 60000
noise = 0.001
fade_probability = 0.006
fade_depth = 0.5
update_ms = 1000
base_delay_ms = 40
queue_packets = 100
loss_rate = 0
)"},
      {"train-explore", R"(# Control-model corpus: wide capacity swings, sender probing below and above capacity.
name = train-explore
bandwidth = sinusoid
bandwidth_kbps = 2500
amplitude_kbps = 2000
period_ms = 120000
noise = 0.02
update_ms = 1000
base_delay_ms = 100
queue_packets = 100
loss_rate = 0
sender_probe_min = 0.3
sender_probe_max = 1.2
)"},
      {"constant-500", R"(# Constant 500 kbps, lossless.
name = constant-500
bandwidth = constant
bandwidth_kbps = 500
update_ms = 1000
base_delay_ms = 40
queue_packets = 100
loss_rate = 0
)"},
  };
  return profiles;
}

} // namespace

double BandwidthProcess::shape(double t_ms) const {
  switch (kind) {
  case BandwidthKind::kConstant:
    return mean_kbps;
  case BandwidthKind::kSinusoid:
    return mean_kbps + amplitude_kbps * std::sin(2.0 * std::numbers::pi * t_ms / period_ms +
                                                 phase_rad);
  case BandwidthKind::kStep: {
    double value = mean_kbps;
    for (const auto &[start, kbps] : steps) {
      if (start > t_ms)
        break;
      value = kbps;
    }
    return value;
  }
  case BandwidthKind::kTrace: {
    if (samples.empty())
      return mean_kbps;
    double value = samples.front().second;
    for (const auto &[time, kbps] : samples) {
      if (time > t_ms)
        break;
      value = kbps;
    }
    return value;
  }
  }
  return mean_kbps;
}

double BandwidthProcess::at(double t_ms, std::uint64_t seed) const {
  const double interval = std::floor(std::max(0.0, t_ms) / update_ms);
  const auto index = static_cast<std::uint64_t>(interval);
  double value = shape(interval * update_ms);
  if (noise > 0.0)
    value *= 1.0 + noise * hash_normal(seed, index);
  if (fade_probability > 0.0 && hash_unit(seed, index, 21) < fade_probability)
    value *= 1.0 - fade_depth * (0.5 + 0.5 * hash_unit(seed, index, 22));
  return std::max(value, kMinCapacityKbps);
}

double BandwidthProcess::mean_over(double t0_ms, double t1_ms, std::uint64_t seed) const {
  if (t1_ms <= t0_ms)
    return at(t0_ms, seed);
  double acc = 0.0;
  double t = t0_ms;
  while (t < t1_ms) {
    const double next = std::min(t1_ms, (std::floor(t / update_ms) + 1.0) * update_ms);
    acc += at(t, seed) * (next - t);
    t = next;
  }
  return acc / (t1_ms - t0_ms);
}

void ScenarioProfile::validate() const {
  auto bad = [&](const std::string &msg) {
    fail(ErrorCode::kInvalidArgument, "profile '" + name + "': " + msg);
  };
  if (!(bandwidth.mean_kbps > 0.0))
    bad("bandwidth_kbps must be positive");
  if (bandwidth.amplitude_kbps < 0.0 || bandwidth.amplitude_kbps >= bandwidth.mean_kbps)
    if (bandwidth.kind == BandwidthKind::kSinusoid)
      bad("sinusoid amplitude must lie in [0, bandwidth_kbps)");
  if (!(bandwidth.period_ms > 0.0))
    bad("period_ms must be positive");
  if (!(bandwidth.update_ms > 0.0))
    bad("update_ms must be positive");
  if (bandwidth.noise < 0.0)
    bad("noise must be non-negative");
  if (bandwidth.fade_probability < 0.0 || bandwidth.fade_probability > 1.0)
    bad("fade_probability must lie in [0, 1]");
  if (bandwidth.fade_depth < 0.0 || bandwidth.fade_depth >= 1.0)
    bad("fade_depth must lie in [0, 1)");
  for (const auto &[start, kbps] : bandwidth.steps)
    if (!(kbps > 0.0))
      bad("step bandwidth must be positive");
  for (const auto &[time, kbps] : bandwidth.samples)
    if (!(kbps > 0.0))
      bad("trace bandwidth must be positive");
  if (bandwidth.kind == BandwidthKind::kTrace && bandwidth.samples.empty())
    bad("trace bandwidth requires trace_file samples");
  if (base_delay_ms < 0.0)
    bad("base_delay_ms must be non-negative");
  if (jitter_ms < 0.0)
    bad("jitter_ms must be non-negative");
  if (queue_packets < 1)
    bad("queue_packets must be at least 1");
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0))
    bad("loss_rate must lie in [0, 1]");
  if (duration_ms < 0.0)
    bad("duration_ms must be non-negative");
  if (sender_lag_ms < 0.0)
    bad("sender_lag_ms must be non-negative");
  if (!(sender_probe_min > 0.0) || !(sender_probe_max >= sender_probe_min))
    bad("sender probe range must satisfy 0 < sender_probe_min <= sender_probe_max");
  if (!(sender_probe_ms > 0.0))
    bad("sender_probe_ms must be positive");
}

void set_profile_value(ScenarioProfile &p, const std::string &key, const std::string &value) {
  auto &bw = p.bandwidth;
  if (key == "name") {
    p.name = value;
  } else if (key == "bandwidth") {
    if (value == "constant")
      bw.kind = BandwidthKind::kConstant;
    else if (value == "step")
      bw.kind = BandwidthKind::kStep;
    else if (value == "sinusoid")
      bw.kind = BandwidthKind::kSinusoid;
    else if (value == "trace")
      bw.kind = BandwidthKind::kTrace;
    else
      fail(ErrorCode::kParse, "unknown bandwidth process '" + value + "'");
  } else if (key == "bandwidth_kbps") {
    bw.mean_kbps = to_double(key, value);
  } else if (key == "amplitude_kbps") {
    bw.amplitude_kbps = to_double(key, value);
  } else if (key == "period_ms") {
    bw.period_ms = to_double(key, value);
  } else if (key == "phase_rad") {
    bw.phase_rad = to_double(key, value);
  } else if (key == "steps") {
    bw.steps = parse_steps(key, value);
  } else if (key == "trace_file") {
    bw.trace_file = value;
    bw.samples = load_bandwidth_samples(value);
  } else if (key == "noise") {
    bw.noise = to_double(key, value);
  } else if (key == "fade_probability") {
    bw.fade_probability = to_double(key, value);
  } else if (key == "fade_depth") {
    bw.fade_depth = to_double(key, value);
  } else if (key == "update_ms") {
    bw.update_ms = to_double(key, value);
  } else if (key == "base_delay_ms") {
    p.base_delay_ms = to_double(key, value);
  } else if (key == "jitter_ms") {
    p.jitter_ms = to_double(key, value);
  } else if (key == "queue_packets") {
    const double q = to_double(key, value);
    if (q != std::floor(q))
      fail(ErrorCode::kParse, "queue_packets must be an integer");
    p.queue_packets = static_cast<int>(q);
  } else if (key == "loss_rate") {
    p.loss_rate = to_double(key, value);
  } else if (key == "clock_offset_ms") {
    p.clock_offset_ms = to_double(key, value);
  } else if (key == "duration_ms") {
    p.duration_ms = to_double(key, value);
  } else if (key == "sender_lag_ms") {
    p.sender_lag_ms = to_double(key, value);
  } else if (key == "sender_probe_min") {
    p.sender_probe_min = to_double(key, value);
  } else if (key == "sender_probe_max") {
    p.sender_probe_max = to_double(key, value);
  } else if (key == "sender_probe_ms") {
    p.sender_probe_ms = to_double(key, value);
  } else {
    fail(ErrorCode::kParse, "unknown profile key '" + key + "'");
  }
}

ScenarioProfile parse_profile(std::istream &in, const std::string &origin) {
  ScenarioProfile profile;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::kParse, origin + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      set_profile_value(profile, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error &e) {
      fail(e.code(), origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  profile.validate();
  return profile;
}

ScenarioProfile load_profile(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::kIo, "cannot open profile '" + path + "'");
  return parse_profile(in, path);
}

ScenarioProfile named_profile(const std::string &name) {
  const auto &profiles = builtin_profiles();
  const auto it = profiles.find(name);
  if (it == profiles.end())
    fail(ErrorCode::kInvalidArgument, "unknown profile '" + name + "'");
  std::istringstream in(it->second);
  return parse_profile(in, name);
}

std::vector<std::string> named_profile_names() {
  std::vector<std::string> names;
  for (const auto &[name, text] : builtin_profiles())
    names.push_back(name);
  return names;
}

ScenarioProfile resolve_profile(const std::string &name_or_path) {
  if (builtin_profiles().count(name_or_path) != 0)
    return named_profile(name_or_path);
  return load_profile(name_or_path);
}

std::string serialize_profile(const ScenarioProfile &p) {
  std::ostringstream out;
  out.precision(17);
  const auto &bw = p.bandwidth;
  out << "name = " << p.name << "\n";
  out << "bandwidth = " << kind_name(bw.kind) << "\n";
  out << "bandwidth_kbps = " << bw.mean_kbps << "\n";
  out << "amplitude_kbps = " << bw.amplitude_kbps << "\n";
  out << "period_ms = " << bw.period_ms << "\n";
  out << "phase_rad = " << bw.phase_rad << "\n";
  if (!bw.steps.empty()) {
    out << "steps = ";
    for (std::size_t i = 0; i < bw.steps.size(); ++i)
      out << (i ? ", " : "") << bw.steps[i].second << "@" << bw.steps[i].first;
    out << "\n";
  }
  if (!bw.trace_file.empty())
    out << "trace_file = " << bw.trace_file << "\n";
  out << "noise = " << bw.noise << "\n";
  out << "fade_probability = " << bw.fade_probability << "\n";
  out << "fade_depth = " << bw.fade_depth << "\n";
  out << "update_ms = " << bw.update_ms << "\n";
  out << "base_delay_ms = " << p.base_delay_ms << "\n";
  out << "jitter_ms = " << p.jitter_ms << "\n";
  out << "queue_packets = " << p.queue_packets << "\n";
  out << "loss_rate = " << p.loss_rate << "\n";
  out << "clock_offset_ms = " << p.clock_offset_ms << "\n";
  out << "duration_ms = " << p.duration_ms << "\n";
  out << "sender_lag_ms = " << p.sender_lag_ms << "\n";
  out << "sender_probe_min = " << p.sender_probe_min << "\n";
  out << "sender_probe_max = " << p.sender_probe_max << "\n";
  out << "sender_probe_ms = " << p.sender_probe_ms << "\n";
  return out.str();
}

} // namespace boundrate
