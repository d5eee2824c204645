// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/sim.hpp"

#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <sstream>

#include "boundrate/error.hpp"
#include "boundrate/random.hpp"
#include "json.hpp"

namespace boundrate {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Endpoints timestamp in whole microseconds, so a constant clock offset
// cancels exactly in every difference the receiver computes.
std::int64_t stamp_us(double t_ms) { return static_cast<std::int64_t>(std::floor(t_ms * 1000.0)); }

double parse_kbps(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0) || !std::isfinite(v))
    fail(ErrorCode::kInvalidArgument,
         std::string(what) + " needs a positive kbps value, got '" + std::string(text) + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

struct InFlight {
  std::uint32_t seq;
  double send_ms;
  double arrival_ms;
};

struct PendingFeedback {
  double arrival_ms;
  FeedbackMessage message;
};

} // namespace

ControllerSpec ControllerSpec::parse(std::string_view text) {
  ControllerSpec spec;
  if (text == "bounded") {
    spec.kind = ControllerKind::kBounded;
  } else if (text == "no-range") {
    spec.kind = ControllerKind::kNoRange;
  } else if (text == "aimd") {
    spec.kind = ControllerKind::kAimd;
  } else if (text.rfind("fixed-range:", 0) == 0) {
    spec.kind = ControllerKind::kFixedRange;
    spec.value_kbps = parse_kbps(text.substr(12), "fixed-range");
  } else if (text.rfind("constant:", 0) == 0) {
    spec.kind = ControllerKind::kConstant;
    spec.value_kbps = parse_kbps(text.substr(9), "constant");
  } else {
    fail(ErrorCode::kInvalidArgument,
         "unknown controller '" + std::string(text) +
             "' (expected bounded, no-range, fixed-range:<kbps>, aimd or constant:<kbps>)");
  }
  return spec;
}

std::string ControllerSpec::to_string() const {
  switch (kind) {
  case ControllerKind::kBounded:
    return "bounded";
  case ControllerKind::kNoRange:
    return "no-range";
  case ControllerKind::kFixedRange:
    return "fixed-range:" + format_double(value_kbps);
  case ControllerKind::kAimd:
    return "aimd";
  case ControllerKind::kConstant:
    return "constant:" + format_double(value_kbps);
  }
  return "unknown";
}

bool ControllerSpec::needs_model() const noexcept {
  return kind == ControllerKind::kBounded || kind == ControllerKind::kNoRange ||
         kind == ControllerKind::kFixedRange;
}

void SimConfig::validate() const {
  auto bad = [](const std::string &what) { fail(ErrorCode::kInvalidArgument, what); };
  filter.validate();
  if (!(slot_ms > 0.0))
    bad("slot duration must be positive");
  if (!(initial_kbps > 0.0))
    bad("initial rate must be positive");
  if (!(floor_kbps > 0.0))
    bad("bitrate floor must be positive");
  if (!(cvbr_interval_ms > 0.0))
    bad("CVBR interval must be positive");
  if (switch_window == 0)
    bad("switch window must be positive");
  if (!(switch_threshold > 0.0))
    bad("switch threshold must be positive");
  if (!(quiet_queue_ms >= 0.0))
    bad("quiet-queue threshold must be non-negative");
  if (!(aimd_increase_kbps >= 0.0) || !(aimd_decrease > 0.0 && aimd_decrease < 1.0))
    bad("AIMD parameters out of range");
}

SessionLog run_session(const ScenarioProfile &profile, const ControllerSpec &controller,
                       const EstimatorModel *model, std::uint64_t seed,
                       const SimConfig &config) {
  profile.validate();
  config.validate();
  if (controller.needs_model() && model == nullptr)
    fail(ErrorCode::kInvalidArgument,
         "controller '" + controller.to_string() + "' needs an estimator model");

  SessionLog log;
  log.profile = profile.name;
  log.controller = controller.to_string();
  log.seed = seed;
  log.duration_ms = profile.duration_ms;
  log.slot_ms = config.slot_ms;
  log.reverse_delay_ms = profile.base_delay_ms;

  Link link(profile, derive_seed(seed, 1));
  const std::uint64_t cvbr_seed = derive_seed(seed, 2);
  const double bits = kMtuBytes * 8.0;
  const auto offset_us = stamp_us(profile.clock_offset_ms);
  const auto slot_us = static_cast<std::int64_t>(std::llround(config.slot_ms * 1000.0));
  const bool hysteresis = controller.needs_model();

  // Sender.
  EncoderConfig current{config.initial_kbps, config.initial_kbps, config.initial_kbps};
  if (controller.kind == ControllerKind::kConstant)
    current = {controller.value_kbps, controller.value_kbps, controller.value_kbps};
  std::deque<double> adopted_targets;
  double next_send = 0.0;
  std::uint32_t seq = 0;

  std::deque<InFlight> in_flight;
  std::deque<PendingFeedback> feedback;

  // Receiver.
  WindowConfig window_config;
  window_config.history = model ? model->history : kDefaultHistory;
  window_config.filter = config.filter;
  window_config.slot_ms = config.slot_ms;
  WindowBuilder builder(window_config);
  bool started = false;
  std::int64_t origin_us = 0; // receiver clock
  std::int64_t origin_true_us = 0;
  std::int64_t slot_index = 0;
  std::vector<PacketRecord> slot_records;
  double latency_sum_ms = 0.0;
  double previous_gradient = 0.0;
  std::uint32_t expected_seq = 0;
  std::int64_t min_owd_us = std::numeric_limits<std::int64_t>::max();
  std::int64_t quiet_missing = 0;
  std::int64_t quiet_expected = 0;
  double aimd_rate = config.initial_kbps;

  auto loss_estimate = [&] {
    if (quiet_expected == 0)
      return 0.0;
    return std::min(0.5, static_cast<double>(quiet_missing) / static_cast<double>(quiet_expected));
  };

  auto close_slot = [&](double now) {
    const auto obs = observe_slot(slot_records, slot_index, config.slot_ms, previous_gradient);
    previous_gradient = obs.delay_gradient_ms;
    SlotRecord rec;
    rec.slot_index = slot_index;
    rec.throughput_kbps = obs.throughput_kbps;
    rec.loss_estimate = loss_estimate();
    rec.input_throughput_kbps = config.loss_compensation
                                    ? obs.throughput_kbps / (1.0 - rec.loss_estimate)
                                    : obs.throughput_kbps;
    rec.capacity_kbps = link.mean_capacity_kbps(now - config.slot_ms - profile.base_delay_ms,
                                                now - profile.base_delay_ms);
    rec.mean_latency_ms =
        obs.packet_count > 0 ? latency_sum_ms / static_cast<double>(obs.packet_count) : 0.0;
    rec.delay_gradient_ms = obs.delay_gradient_ms;
    rec.packets = obs.packet_count;

    SlotObservation input = obs;
    input.throughput_kbps = rec.input_throughput_kbps;
    builder.push(input);
    rec.smoothed_gradient_ms = builder.smoothed_gradient_ms();
    const auto window = builder.window();
    rec.demanded_gradient_ms = window.demanded_gradient_ms;

    RatePrediction p;
    switch (controller.kind) {
    case ControllerKind::kBounded:
      p = predict(*model, window);
      break;
    case ControllerKind::kNoRange:
      p = predict(*model, window);
      p.half_width_kbps = kMinHalfWidthKbps;
      break;
    case ControllerKind::kFixedRange:
      p = predict(*model, window);
      p.half_width_kbps = controller.value_kbps;
      break;
    case ControllerKind::kAimd:
      if (rec.smoothed_gradient_ms > config.aimd_gradient_ms)
        aimd_rate *= config.aimd_decrease;
      else
        aimd_rate += config.aimd_increase_kbps;
      aimd_rate = std::max(aimd_rate, config.floor_kbps);
      p = {aimd_rate, kMinHalfWidthKbps};
      break;
    case ControllerKind::kConstant:
      p = {controller.value_kbps, kMinHalfWidthKbps};
      break;
    }
    rec.prediction = p;
    if (slot_index == 0)
      log.target_delay_ms = rec.mean_latency_ms;

    FeedbackMessage msg{static_cast<std::uint32_t>(slot_index), p.baseline_kbps,
                        p.half_width_kbps, rec.demanded_gradient_ms};
    log.feedback.push_back(msg);
    feedback.push_back({now + profile.base_delay_ms, msg});
    log.slots.push_back(rec);

    slot_records.clear();
    latency_sum_ms = 0.0;
    ++slot_index;
  };

  auto apply_feedback = [&](const FeedbackMessage &msg) {
    const auto proposed =
        encoder_params({msg.baseline_kbps, msg.half_width_kbps}, config.floor_kbps);
    if (hysteresis) {
      current = smooth_switch(current, proposed,
                              std::vector<double>(adopted_targets.begin(), adopted_targets.end()),
                              config.switch_threshold);
      adopted_targets.push_back(current.target_kbps);
      if (adopted_targets.size() > config.switch_window)
        adopted_targets.pop_front();
    } else {
      current = proposed;
    }
    log.slots.at(msg.slot_index).commanded = current;
  };

  auto receive = [&](const InFlight &pkt) {
    const auto recv_us = stamp_us(pkt.arrival_ms) + offset_us;
    const auto send_us = stamp_us(pkt.send_ms);
    if (!started) {
      started = true;
      origin_us = recv_us;
      origin_true_us = stamp_us(pkt.arrival_ms);
    }
    const auto owd_us = recv_us - send_us;
    min_owd_us = std::min(min_owd_us, owd_us);
    if (pkt.seq >= expected_seq) {
      const std::int64_t missing = pkt.seq - expected_seq;
      if (owd_us - min_owd_us <= static_cast<std::int64_t>(config.quiet_queue_ms * 1000.0)) {
        quiet_missing += missing;
        quiet_expected += missing + 1;
      }
      expected_seq = pkt.seq + 1;
    }
    slot_records.push_back({log.profile, static_cast<double>(send_us) / 1000.0,
                            static_cast<double>(recv_us - origin_us) / 1000.0, kMtuBytes});
    latency_sum_ms += static_cast<double>(owd_us) / 1000.0;
    log.packets[pkt.seq].recv_ms = static_cast<double>(recv_us) / 1000.0;
    ++log.packets_received;
    log.bytes_received += kMtuBytes;
  };

  auto send = [&](double now) {
    PacketEvent ev;
    ev.seq = seq;
    ev.send_ms = now;
    const auto result = link.transit(kMtuBytes, now);
    ev.outcome = result.outcome;
    if (result.outcome == TransitOutcome::kDelivered)
      in_flight.push_back({seq, now, result.arrival_ms});
    else if (result.outcome == TransitOutcome::kRandomLoss)
      ++log.random_losses;
    else
      ++log.overflow_drops;
    log.packets.push_back(ev);
    ++log.packets_sent;
    log.bytes_sent += kMtuBytes;
    ++seq;

    const auto interval = static_cast<std::uint64_t>(now / config.cvbr_interval_ms);
    const double u = unit_from_bits(derive_seed(cvbr_seed, interval));
    const double rate = current.min_kbps + (current.max_kbps - current.min_kbps) * u;
    next_send = now + bits / rate;
  };

  const double end = profile.duration_ms;
  while (true) {
    const double t_send = next_send < end ? next_send : kInf;
    const double t_feedback = feedback.empty() ? kInf : feedback.front().arrival_ms;
    // Receiver: the next arrival, unless its stamp falls past the current
    // slot boundary, in which case the slot closes first.
    bool arrival = !in_flight.empty();
    double t_receiver = arrival ? in_flight.front().arrival_ms : kInf;
    if (started) {
      const std::int64_t boundary_true_us = origin_true_us + (slot_index + 1) * slot_us;
      if (!arrival || stamp_us(in_flight.front().arrival_ms) >= boundary_true_us) {
        arrival = false;
        t_receiver = static_cast<double>(boundary_true_us) / 1000.0;
      }
    }
    const double t_next = std::min({t_send, t_feedback, t_receiver});
    if (!(t_next < end))
      break;
    if (t_receiver <= t_next) {
      if (arrival) {
        receive(in_flight.front());
        in_flight.pop_front();
      } else {
        close_slot(t_receiver);
      }
    } else if (t_feedback <= t_next) {
      apply_feedback(feedback.front().message);
      feedback.pop_front();
    } else {
      send(t_send);
    }
  }
  return log;
}

void write_session_csv(std::ostream &out, const SessionLog &log) {
  out << kSlotCsvHeader << '\n';
  for (const auto &s : log.slots) {
    out << s.slot_index << ',' << format_double(s.throughput_kbps) << ','
        << format_double(s.input_throughput_kbps) << ',' << format_double(s.capacity_kbps) << ','
        << format_double(s.mean_latency_ms) << ',' << format_double(s.delay_gradient_ms) << ','
        << format_double(s.smoothed_gradient_ms) << ','
        << format_double(s.demanded_gradient_ms) << ',' << format_double(s.loss_estimate)
        << ',' << s.packets << ',' << format_double(s.prediction.baseline_kbps) << ','
        << format_double(s.prediction.half_width_kbps) << ','
        << format_double(s.commanded.min_kbps) << ',' << format_double(s.commanded.target_kbps)
        << ',' << format_double(s.commanded.max_kbps) << '\n';
  }
}

std::string session_summary_json(const SessionLog &log) {
  nlohmann::ordered_json j;
  j["profile"] = log.profile;
  j["controller"] = log.controller;
  j["seed"] = log.seed;
  j["duration_ms"] = log.duration_ms;
  j["slot_ms"] = log.slot_ms;
  j["slots"] = log.slots.size();
  j["target_delay_ms"] = log.target_delay_ms;
  j["packets_sent"] = log.packets_sent;
  j["packets_received"] = log.packets_received;
  j["random_losses"] = log.random_losses;
  j["overflow_drops"] = log.overflow_drops;
  j["bytes_sent"] = log.bytes_sent;
  j["bytes_received"] = log.bytes_received;
  return j.dump(2);
}

} // namespace boundrate
