// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/control.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "boundrate/error.hpp"

namespace boundrate {
namespace {

void put_u64(std::uint8_t *out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t *in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

} // namespace

EncoderConfig encoder_params(const RatePrediction &prediction, double floor_kbps) {
  if (!std::isfinite(prediction.baseline_kbps) || !std::isfinite(prediction.half_width_kbps))
    fail(ErrorCode::kInvalidArgument, "prediction is not finite");
  if (!(floor_kbps > 0.0))
    fail(ErrorCode::kInvalidArgument, "bitrate floor must be positive");
  EncoderConfig c;
  c.min_kbps = std::max(floor_kbps, prediction.lower_kbps());
  c.target_kbps = std::max(floor_kbps, prediction.baseline_kbps);
  c.max_kbps = std::max(floor_kbps, prediction.upper_kbps());
  c.target_kbps = std::max(c.target_kbps, c.min_kbps);
  c.max_kbps = std::max(c.max_kbps, c.target_kbps);
  return c;
}

EncoderConfig smooth_switch(const EncoderConfig &current, const EncoderConfig &proposed,
                            std::span<const double> history, double threshold) {
  if (!(threshold > 0.0))
    fail(ErrorCode::kInvalidArgument, "switch threshold must be positive");
  if (history.empty())
    return proposed;
  const double average = std::accumulate(history.begin(), history.end(), 0.0) /
                         static_cast<double>(history.size());
  if (!(average > 0.0))
    return proposed;
  return std::abs(proposed.target_kbps - average) / average > threshold ? proposed : current;
}

std::array<std::uint8_t, kFeedbackWireSize> encode_feedback(const FeedbackMessage &message) {
  std::array<std::uint8_t, kFeedbackWireSize> out{};
  for (int i = 0; i < 4; ++i)
    out[i] = static_cast<std::uint8_t>(message.slot_index >> (8 * i));
  put_u64(out.data() + 4, std::bit_cast<std::uint64_t>(message.baseline_kbps));
  put_u64(out.data() + 12, std::bit_cast<std::uint64_t>(message.half_width_kbps));
  put_u64(out.data() + 20, std::bit_cast<std::uint64_t>(message.demanded_gradient_ms));
  return out;
}

FeedbackMessage decode_feedback(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kFeedbackWireSize)
    fail(ErrorCode::kParse, "feedback message must be " + std::to_string(kFeedbackWireSize) +
                                " bytes, got " + std::to_string(bytes.size()));
  FeedbackMessage m;
  for (int i = 0; i < 4; ++i)
    m.slot_index |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  m.baseline_kbps = std::bit_cast<double>(get_u64(bytes.data() + 4));
  m.half_width_kbps = std::bit_cast<double>(get_u64(bytes.data() + 12));
  m.demanded_gradient_ms = std::bit_cast<double>(get_u64(bytes.data() + 20));
  if (!(m.half_width_kbps >= kMinHalfWidthKbps))
    fail(ErrorCode::kParse, "feedback half-width below the minimum range");
  return m;
}

} // namespace boundrate
