// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include <sstream>

#include "doctest.h"

#include "boundrate/error.hpp"
#include "boundrate/sim.hpp"

using namespace boundrate;

namespace {

ScenarioProfile profile_from(const std::string &text) {
  std::istringstream in(text);
  return parse_profile(in);
}

ScenarioProfile constant_link(double kbps, double duration_ms, double loss = 0.0) {
  auto p = profile_from("bandwidth = constant\nbandwidth_kbps = " + std::to_string(kbps) +
                        "\nbase_delay_ms = 40\nqueue_packets = 2000\n");
  p.duration_ms = duration_ms;
  p.loss_rate = loss;
  return p;
}

double sum_gradients(const SessionLog &log, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to && i < log.slots.size(); ++i)
    s += log.slots[i].delay_gradient_ms;
  return s;
}

} // namespace

TEST_SUITE("sim") {

TEST_CASE("controller strings") {
  CHECK(ControllerSpec::parse("bounded").kind == ControllerKind::kBounded);
  CHECK(ControllerSpec::parse("no-range").kind == ControllerKind::kNoRange);
  CHECK(ControllerSpec::parse("aimd").kind == ControllerKind::kAimd);
  const auto fixed = ControllerSpec::parse("fixed-range:250");
  CHECK(fixed.kind == ControllerKind::kFixedRange);
  CHECK(fixed.value_kbps == 250.0);
  CHECK(ControllerSpec::parse(fixed.to_string()).value_kbps == 250.0);
  CHECK(ControllerSpec::parse("constant:800").value_kbps == 800.0);
  CHECK(ControllerSpec::parse("bounded").needs_model());
  CHECK_FALSE(ControllerSpec::parse("aimd").needs_model());
  CHECK_FALSE(ControllerSpec::parse("constant:1").needs_model());
  for (const char *bad : {"", "Bounded", "fixed-range", "fixed-range:", "fixed-range:-5",
                          "constant:abc", "constant:0", "gcc"})
    CHECK_THROWS_AS(ControllerSpec::parse(bad), Error);
}

TEST_CASE("model controllers refuse to run without a model") {
  const auto p = constant_link(1000, 5000);
  CHECK_THROWS_AS(run_session(p, ControllerSpec::parse("bounded"), nullptr, 1), Error);
}

TEST_CASE("same seed gives an identical session") {
  auto p = named_profile("very-bad-network");
  p.duration_ms = 20000;
  const auto model = build_architecture(ArchKind::kA, 1);
  for (const char *c : {"bounded", "aimd", "constant:700"}) {
    CAPTURE(c);
    const auto spec = ControllerSpec::parse(c);
    const auto a = run_session(p, spec, &model, 9);
    const auto b = run_session(p, spec, &model, 9);
    CHECK(a == b);
    const auto other = run_session(p, spec, &model, 10);
    CHECK_FALSE(a.packets == other.packets);
  }
}

TEST_CASE("packets and bytes are conserved") {
  auto p = named_profile("very-bad-network");
  p.duration_ms = 30000;
  const auto model = build_architecture(ArchKind::kA, 1);
  const auto log = run_session(p, ControllerSpec::parse("bounded"), &model, 3);
  std::int64_t delivered = 0, random = 0, overflow = 0;
  for (const auto &ev : log.packets) {
    if (ev.outcome == TransitOutcome::kDelivered)
      ++delivered;
    else if (ev.outcome == TransitOutcome::kRandomLoss)
      ++random;
    else
      ++overflow;
  }
  CHECK(log.packets_sent == static_cast<std::int64_t>(log.packets.size()));
  CHECK(delivered + random + overflow == log.packets_sent);
  CHECK(random == log.random_losses);
  CHECK(overflow == log.overflow_drops);
  CHECK(log.packets_received <= delivered);
  CHECK(log.bytes_sent == log.packets_sent * kMtuBytes);
  CHECK(log.bytes_received == log.packets_received * kMtuBytes);
  std::int64_t slot_packets = 0;
  for (const auto &s : log.slots)
    slot_packets += s.packets;
  CHECK(slot_packets <= log.packets_received);
  CHECK(log.packets_received - slot_packets < 2 * log.packets_received / static_cast<std::int64_t>(log.slots.size()) + 10);
}

TEST_CASE("overload grows the queue and a capacity step drains it") {
  auto p = profile_from("bandwidth = step\nsteps = 1000@0, 4000@10000\nbase_delay_ms = 40\n"
                        "queue_packets = 5000\n");
  p.duration_ms = 20000;
  const auto log = run_session(p, ControllerSpec::parse("constant:2000"), nullptr, 1);
  REQUIRE(log.slots.size() >= 18);
  for (std::size_t i = 1; i < 9; ++i)
    CHECK(log.slots[i].delay_gradient_ms > 0.0);
  CHECK(sum_gradients(log, 11, 15) < 0.0);
  CHECK(log.slots[8].mean_latency_ms > log.slots[1].mean_latency_ms);
  CHECK(log.overflow_drops == 0);
}

TEST_CASE("an underloaded link shows no queueing") {
  const auto log = run_session(constant_link(2000, 20000), ControllerSpec::parse("constant:500"),
                               nullptr, 1);
  for (std::size_t i = 1; i < log.slots.size(); ++i) {
    CHECK(std::abs(log.slots[i].delay_gradient_ms) < 1e-2);
    CHECK(log.slots[i].throughput_kbps == doctest::Approx(500).epsilon(0.02));
  }
}

TEST_CASE("receiver clock offset shifts latency and nothing else") {
  auto base = named_profile("very-bad-network");
  base.duration_ms = 30000;
  const auto model = build_architecture(ArchKind::kA, 2);
  const auto ref = run_session(base, ControllerSpec::parse("bounded"), &model, 4);
  for (double offset : {-500.0, 500.0}) {
    auto p = base;
    p.clock_offset_ms = offset;
    const auto log = run_session(p, ControllerSpec::parse("bounded"), &model, 4);
    REQUIRE(log.slots.size() == ref.slots.size());
    for (std::size_t i = 0; i < log.slots.size(); ++i) {
      CHECK(log.slots[i].throughput_kbps == ref.slots[i].throughput_kbps);
      CHECK(log.slots[i].delay_gradient_ms == doctest::Approx(ref.slots[i].delay_gradient_ms).epsilon(1e-9));
      CHECK(log.slots[i].commanded == ref.slots[i].commanded);
      if (log.slots[i].packets > 0)
        CHECK(log.slots[i].mean_latency_ms == doctest::Approx(ref.slots[i].mean_latency_ms + offset));
    }
  }
}

TEST_CASE("constant sender keeps its configured rate inside the minimum range") {
  const auto log = run_session(constant_link(4000, 10000), ControllerSpec::parse("constant:1200"),
                               nullptr, 1);
  for (const auto &s : log.slots)
    CHECK(s.commanded == EncoderConfig{1199, 1200, 1201});
}

TEST_CASE("aimd backs off under queueing and probes upward otherwise") {
  const auto log = run_session(constant_link(1500, 120000), ControllerSpec::parse("aimd"),
                               nullptr, 1);
  bool increased = false, decreased = false;
  for (std::size_t i = 1; i < log.slots.size(); ++i) {
    const double prev = log.slots[i - 1].prediction.baseline_kbps;
    const double now = log.slots[i].prediction.baseline_kbps;
    if (now == doctest::Approx(prev + 50.0))
      increased = true;
    if (now == doctest::Approx(prev * 0.85))
      decreased = true;
  }
  CHECK(increased);
  CHECK(decreased);
  CHECK(log.slots.front().prediction.baseline_kbps == doctest::Approx(350));
}

TEST_CASE("model controllers follow the hysteresis rule on adopted targets") {
  auto p = named_profile("very-bad-network");
  p.duration_ms = 40000;
  const auto model = build_architecture(ArchKind::kB, 3);
  const auto log = run_session(p, ControllerSpec::parse("fixed-range:100"), &model, 2);
  for (const auto &s : log.slots)
    if (s.commanded.target_kbps > 0.0)
      CHECK(s.commanded.max_kbps - s.commanded.target_kbps <= 100.0 + 1e-9);
}

TEST_CASE("session CSV has one row per slot") {
  auto p = constant_link(1000, 8000);
  const auto log = run_session(p, ControllerSpec::parse("constant:600"), nullptr, 1);
  std::ostringstream out;
  write_session_csv(out, log);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == kSlotCsvHeader);
  std::size_t rows = 0, commas = 0;
  while (std::getline(in, line)) {
    ++rows;
    commas = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  }
  CHECK(rows == log.slots.size());
  CHECK(commas == 14);
  CHECK(session_summary_json(log).find("\"packets_sent\"") != std::string::npos);
}

TEST_CASE("invalid simulator settings are rejected") {
  const auto p = constant_link(1000, 5000);
  SimConfig c;
  c.slot_ms = 0;
  CHECK_THROWS_AS(run_session(p, ControllerSpec::parse("aimd"), nullptr, 1, c), Error);
  c = {};
  c.switch_threshold = -1;
  CHECK_THROWS_AS(run_session(p, ControllerSpec::parse("aimd"), nullptr, 1, c), Error);
}

} // TEST_SUITE sim
