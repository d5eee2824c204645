// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "boundrate/delay.hpp"
#include "boundrate/error.hpp"
#include "boundrate/random.hpp"
#include "boundrate/link.hpp"

namespace boundrate {
namespace {

[[noreturn]] void parse_fail(int line_no, const std::string &msg) {
  fail(ErrorCode::kParse, "trace line " + std::to_string(line_no) + ": " + msg);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T> T parse_number(std::string_view field, int line_no, const char *what) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    parse_fail(line_no, std::string(what) + " is not numeric: '" + std::string(field) + "'");
  return value;
}

void append_double(std::string &out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

} // namespace

std::vector<PacketRecord> parse_trace(std::istream &in) {
  std::vector<PacketRecord> records;
  std::map<std::string, double, std::less<>> last_send;
  std::string line;
  int line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip(line);
    if (view.empty() || view.front() == '#')
      continue;
    if (!seen_data && view == kTraceHeader) {
      seen_data = true;
      continue;
    }
    seen_data = true;

    std::array<std::string_view, 4> fields;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      const auto piece = view.substr(start, comma == std::string_view::npos ? comma : comma - start);
      if (count < fields.size())
        fields[count] = strip(piece);
      ++count;
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
    if (count != 4)
      parse_fail(line_no, "expected 4 fields, found " + std::to_string(count));

    PacketRecord r;
    r.session_id = std::string(fields[0]);
    if (r.session_id.empty())
      parse_fail(line_no, "empty session_id");
    r.send_time_ms = parse_number<double>(fields[1], line_no, "send_time_ms");
    r.recv_time_ms = parse_number<double>(fields[2], line_no, "recv_time_ms");
    r.size_bytes = parse_number<std::int64_t>(fields[3], line_no, "size_bytes");
    if (!std::isfinite(r.send_time_ms) || !std::isfinite(r.recv_time_ms))
      parse_fail(line_no, "non-finite timestamp");
    if (r.size_bytes <= 0)
      parse_fail(line_no, "size_bytes must be positive");
    auto it = last_send.find(r.session_id);
    if (it != last_send.end()) {
      if (r.send_time_ms < it->second)
        parse_fail(line_no, "send_time_ms decreases within session '" + r.session_id + "'");
      it->second = r.send_time_ms;
    } else {
      last_send.emplace(r.session_id, r.send_time_ms);
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PacketRecord> load_trace(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::kIo, "cannot open trace '" + path + "'");
  try {
    return parse_trace(in);
  } catch (const Error &e) {
    fail(e.code(), path + ": " + e.what());
  }
}

void write_trace(std::ostream &out, std::span<const PacketRecord> records) {
  std::string buffer;
  buffer.reserve(64 * (records.size() + 1));
  buffer.append(kTraceHeader).push_back('\n');
  for (const auto &r : records) {
    buffer.append(r.session_id).push_back(',');
    append_double(buffer, r.send_time_ms);
    buffer.push_back(',');
    append_double(buffer, r.recv_time_ms);
    buffer.push_back(',');
    buffer.append(std::to_string(r.size_bytes)).push_back('\n');
  }
  out << buffer;
}

void save_trace(const std::string &path, std::span<const PacketRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::kIo, "cannot write trace '" + path + "'");
  write_trace(out, records);
  if (!out)
    fail(ErrorCode::kIo, "failed writing trace '" + path + "'");
}

SlotObservation observe_slot(std::span<const PacketRecord> packets, std::int64_t slot_index,
                             double slot_ms, double previous_gradient_ms) {
  SlotObservation obs;
  obs.slot_index = slot_index;
  obs.packet_count = static_cast<std::int64_t>(packets.size());
  for (const auto &p : packets)
    obs.bytes += p.size_bytes;
  obs.throughput_kbps = static_cast<double>(obs.bytes) * 8.0 / slot_ms;
  if (auto g = delay_gradient(packets)) {
    obs.delay_gradient_ms = *g;
    obs.gradient_measured = true;
  } else {
    obs.delay_gradient_ms = previous_gradient_ms;
  }
  return obs;
}

std::vector<SlotObservation> slot_packets(std::span<const PacketRecord> records, double slot_ms,
                                          std::optional<double> origin_ms) {
  if (!(slot_ms > 0.0))
    fail(ErrorCode::kInvalidArgument, "slot duration must be positive");
  std::vector<SlotObservation> slots;
  if (records.empty())
    return slots;
  const double origin = origin_ms.value_or(records.front().recv_time_ms);
  double previous = 0.0;
  std::size_t begin = 0;
  std::int64_t index = 0;
  while (begin < records.size()) {
    const double slot_end = origin + static_cast<double>(index + 1) * slot_ms;
    std::size_t end = begin;
    while (end < records.size() && records[end].recv_time_ms < slot_end) {
      if (records[end].recv_time_ms < origin)
        fail(ErrorCode::kInvalidArgument, "record received before slot origin");
      if (end > 0 && records[end].recv_time_ms < records[end - 1].recv_time_ms)
        fail(ErrorCode::kInvalidArgument, "records must be sorted by recv_time");
      ++end;
    }
    auto obs = observe_slot(records.subspan(begin, end - begin), index, slot_ms, previous);
    previous = obs.delay_gradient_ms;
    slots.push_back(obs);
    begin = end;
    ++index;
  }
  return slots;
}

SynthTrace synth_trace_detailed(const ScenarioProfile &profile, std::uint64_t seed,
                                double duration_ms) {
  profile.validate();
  if (duration_ms < 0.0)
    fail(ErrorCode::kInvalidArgument, "duration must be non-negative");
  SynthTrace out;
  Link link(profile, seed);
  const std::string session = profile.name + "-" + std::to_string(seed);
  const double bits = kMtuBytes * 8.0;
  const std::uint64_t probe_seed = derive_seed(seed, 0x9b0be);
  double now = 0.0;
  while (now < duration_ms) {
    ++out.packets_sent;
    const auto result = link.transit(kMtuBytes, now);
    switch (result.outcome) {
    case TransitOutcome::kDelivered:
      out.records.push_back(PacketRecord{session, now,
                                         result.arrival_ms + profile.clock_offset_ms,
                                         kMtuBytes});
      break;
    case TransitOutcome::kRandomLoss:
      ++out.random_losses;
      break;
    case TransitOutcome::kQueueOverflow:
      ++out.overflow_drops;
      break;
    }
    const auto interval = static_cast<std::uint64_t>(now / profile.sender_probe_ms);
    const double factor =
        profile.sender_probe_min + (profile.sender_probe_max - profile.sender_probe_min) *
                                       unit_from_bits(derive_seed(probe_seed, interval));
    const double rate =
        link.capacity_kbps(std::max(0.0, now - profile.sender_lag_ms)) * factor;
    now += bits / rate;
  }
  return out;
}

std::vector<PacketRecord> synth_trace(const ScenarioProfile &profile, std::uint64_t seed,
                                      double duration_ms) {
  return synth_trace_detailed(profile, seed, duration_ms).records;
}

} // namespace boundrate
