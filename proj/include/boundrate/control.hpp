// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "boundrate/estimator.hpp"

namespace boundrate {

inline constexpr double kBitrateFloorKbps = 50.0;
inline constexpr std::size_t kSwitchWindow = 4;
inline constexpr double kSwitchThreshold = 0.10;

/// CVBR encoder parameters.
struct EncoderConfig {
  double min_kbps = 0.0;
  double target_kbps = 0.0;
  double max_kbps = 0.0;
  bool operator==(const EncoderConfig &) const = default;
};

/// (V_f - V_e, V_f, V_f + V_e), each raised to at least `floor_kbps`.
EncoderConfig encoder_params(const RatePrediction &prediction,
                             double floor_kbps = kBitrateFloorKbps);

/// Returns `proposed` when its target differs from the mean of `history`
/// (recent targets) by more than `threshold` relative to that mean, or when
/// `history` is empty; otherwise `current`.
EncoderConfig smooth_switch(const EncoderConfig &current, const EncoderConfig &proposed,
                            std::span<const double> history, double threshold = kSwitchThreshold);

struct FeedbackMessage {
  std::uint32_t slot_index = 0;
  double baseline_kbps = 0.0;
  double half_width_kbps = kMinHalfWidthKbps;
  double demanded_gradient_ms = 0.0;
  bool operator==(const FeedbackMessage &) const = default;
};

/// Wire layout, little-endian, 28 bytes:
///   0  u32 slot_index
///   4  f64 baseline_kbps
///  12  f64 half_width_kbps
///  20  f64 demanded_gradient_ms
inline constexpr std::size_t kFeedbackWireSize = 28;
std::array<std::uint8_t, kFeedbackWireSize> encode_feedback(const FeedbackMessage &message);
FeedbackMessage decode_feedback(std::span<const std::uint8_t> bytes);

} // namespace boundrate
