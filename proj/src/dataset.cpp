// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include <algorithm>
#include <cmath>
#include <map>

#include "boundrate/error.hpp"
#include "boundrate/estimator.hpp"
#include "boundrate/random.hpp"

namespace boundrate {

WindowBuilder::WindowBuilder(WindowConfig config) : config_(config) {
  config_.filter.validate();
  if (config_.history == 0)
    fail(ErrorCode::kInvalidArgument, "history length must be positive");
}

void WindowBuilder::push(const SlotObservation &slot) {
  const double raw = slot.delay_gradient_ms;
  smoothed_ = slots_seen_ == 0 ? raw : smooth_gradient(raw, smoothed_, config_.filter.smoothing);
  throughputs_.push_back(slot.throughput_kbps);
  gradients_.push_back(smoothed_);
  if (throughputs_.size() > config_.history) {
    throughputs_.erase(throughputs_.begin());
    gradients_.erase(gradients_.begin());
  }
  ++slots_seen_;
}

HistoryWindow WindowBuilder::window() const {
  if (empty())
    fail(ErrorCode::kState, "no slot observed yet");
  HistoryWindow w;
  const std::size_t pad = config_.history - throughputs_.size();
  w.throughputs_kbps.assign(pad, throughputs_.front());
  w.delay_gradients_ms.assign(pad, gradients_.front());
  w.throughputs_kbps.insert(w.throughputs_kbps.end(), throughputs_.begin(), throughputs_.end());
  w.delay_gradients_ms.insert(w.delay_gradients_ms.end(), gradients_.begin(), gradients_.end());
  w.demanded_gradient_ms = target_gradient(w.delay_gradients_ms, config_.filter.alpha);
  return w;
}

std::vector<std::vector<PacketRecord>> split_sessions(std::span<const PacketRecord> records) {
  std::vector<std::vector<PacketRecord>> sessions;
  std::map<std::string, std::size_t> index;
  for (const auto &r : records) {
    auto [it, inserted] = index.try_emplace(r.session_id, sessions.size());
    if (inserted)
      sessions.emplace_back();
    sessions[it->second].push_back(r);
  }
  for (auto &s : sessions)
    std::stable_sort(s.begin(), s.end(), [](const PacketRecord &a, const PacketRecord &b) {
      return a.recv_time_ms < b.recv_time_ms;
    });
  return sessions;
}

Dataset dataset_from_traces(const std::vector<std::vector<PacketRecord>> &sessions,
                            const WindowConfig &config) {
  Dataset ds;
  for (const auto &records : sessions) {
    const auto slots = slot_packets(records, config.slot_ms);
    // The last slot is cut short by the end of the trace.
    if (slots.size() < 3)
      continue;
    const std::size_t complete = slots.size() - 1;
    const std::size_t first = ds.samples.size();
    WindowBuilder builder(config);
    for (std::size_t t = 0; t + 1 < complete; ++t) {
      builder.push(slots[t]);
      const double next = slots[t + 1].throughput_kbps;
      if (next > 0.0)
        ds.samples.push_back({builder.window(), next});
    }
    if (ds.samples.size() > first)
      ds.session_starts.push_back(first);
  }
  if (ds.samples.empty())
    fail(ErrorCode::kInvalidArgument, "traces too short to form any training sample");
  return ds;
}

Dataset dataset_from_profile(const ScenarioProfile &profile, std::size_t sessions,
                             std::uint64_t seed, const WindowConfig &config) {
  if (sessions == 0)
    fail(ErrorCode::kInvalidArgument, "session count must be positive");
  std::vector<std::vector<PacketRecord>> traces;
  for (std::size_t s = 0; s < sessions; ++s)
    traces.push_back(synth_trace(profile, derive_seed(seed, s), profile.duration_ms));
  return dataset_from_traces(traces, config);
}

Split split_dataset(const Dataset &dataset, std::uint64_t seed) {
  const std::size_t n = dataset.samples.size();
  if (n < 2)
    fail(ErrorCode::kInvalidArgument, "dataset needs at least two samples to split");
  Split split;
  const std::size_t sessions = dataset.session_count();
  auto block = [&](std::size_t s) {
    const std::size_t begin = dataset.session_starts[s];
    const std::size_t end = s + 1 < sessions ? dataset.session_starts[s + 1] : n;
    return std::pair{begin, end};
  };
  if (sessions < 2) {
    std::size_t cut = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(n)));
    cut = std::clamp<std::size_t>(cut, 1, n - 1);
    for (std::size_t i = 0; i < n; ++i)
      (i < cut ? split.train : split.validation).push_back(i);
    return split;
  }
  std::vector<std::size_t> order(sessions);
  for (std::size_t i = 0; i < sessions; ++i)
    order[i] = i;
  Rng rng(derive_seed(seed, 0x5e55));
  for (std::size_t i = sessions; i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t held_out = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(sessions))), 1,
      sessions - 1);
  std::vector<bool> validation(sessions, false);
  for (std::size_t i = 0; i < held_out; ++i)
    validation[order[i]] = true;
  for (std::size_t s = 0; s < sessions; ++s) {
    const auto [begin, end] = block(s);
    for (std::size_t i = begin; i < end; ++i)
      (validation[s] ? split.validation : split.train).push_back(i);
  }
  return split;
}

} // namespace boundrate
