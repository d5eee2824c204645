// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boundrate/delay.hpp"
#include "boundrate/network.hpp"
#include "boundrate/trace.hpp"

namespace boundrate {

enum class ArchKind { kA, kB, kC, kD };

const char *arch_name(ArchKind kind);
std::optional<ArchKind> parse_arch(std::string_view text);
inline constexpr ArchKind kAllArchs[] = {ArchKind::kA, ArchKind::kB, ArchKind::kC, ArchKind::kD};

inline constexpr double kDefaultLrPn = 0.000625;
inline constexpr double kDefaultLrEen = 0.001;
inline constexpr double kAnpeFloor = 1e-6;      // normalized units
inline constexpr double kMinHalfWidthKbps = 1.0; // V_e clamp

/// Estimator input: the last k slot throughputs and smoothed delay
/// gradients (oldest first) plus the demanded gradient for the next slot.
struct HistoryWindow {
  std::vector<double> throughputs_kbps;
  std::vector<double> delay_gradients_ms;
  double demanded_gradient_ms = 0.0;

  std::size_t size() const noexcept { return throughputs_kbps.size(); }
  void validate(std::size_t k) const;
};

struct RatePrediction {
  double baseline_kbps = 0.0;   // V_f
  double half_width_kbps = 0.0; // V_e
  double lower_kbps() const noexcept { return baseline_kbps - half_width_kbps; }
  double upper_kbps() const noexcept { return baseline_kbps + half_width_kbps; }
  bool operator==(const RatePrediction &) const = default;
};

struct Normalization {
  double throughput_kbps = 1000.0;
  double gradient_ms = 100.0;
};

/// Shared trunk with two linear scalar heads: PN predicts the next
/// throughput, EEN predicts PN's absolute error. Both heads see the trunk
/// features; only PN's loss trains the trunk.
struct EstimatorModel {
  ArchKind arch = ArchKind::kD;
  std::size_t history = kDefaultHistory;
  Normalization norm;
  std::int64_t epochs_trained = 0;
  nn::Network trunk;
  nn::Network pn;
  nn::Network een;

  nn::Tensor encode(const HistoryWindow &window) const;
  std::size_t parameter_count() const;
};

/// Input layout is [b_1..b_k, q_1..q_k, e].
/// A: dense(64)-relu-dense(64)-relu.
/// B: per-signal conv1d(64, 3) + relu paths, flattened and merged with e,
///    then dense(64)-relu.
/// C: [k, 2] sequence through gru(64, sequences) and gru(64, last), merged
///    with e.
/// D: B's path and C's stacked GRUs side by side, merged into a 128-wide
///    feature layer.
EstimatorModel build_architecture(ArchKind kind, std::uint64_t seed,
                                  std::size_t history = kDefaultHistory);

RatePrediction predict(const EstimatorModel &model, const HistoryWindow &window);

/// |actual - predicted| / max(|predicted|, floor).
double anpe(double actual, double predicted, double floor = kAnpeFloor);
/// 1 - RMSE(estimated, actual).
double eer(std::span<const double> estimated_errors, std::span<const double> actual_errors);
/// Fraction of actuals inside the closed predicted ranges.
double coverage_rate(std::span<const RatePrediction> predictions,
                     std::span<const double> actuals_kbps);

struct StepLosses {
  double loss_pred = 0.0;
  double loss_err = 0.0;
};

/// One single-sample update. Both losses come from one forward pass; the PN
/// gradient flows through the PN head and the trunk, the EEN gradient only
/// into the EEN head.
StepLosses train_step(EstimatorModel &model, const HistoryWindow &window, double actual_kbps,
                      double lr_pn = kDefaultLrPn, double lr_een = kDefaultLrEen);
/// The EEN half of train_step alone. Returns Loss_err.
double een_step(EstimatorModel &model, const HistoryWindow &window, double actual_kbps,
                double lr_een = kDefaultLrEen);

/// Loss_pred for one sample as a function of the current parameters, with
/// its analytic gradient over trunk and PN tensors (in that order).
double pn_loss_and_gradients(const EstimatorModel &model, const HistoryWindow &window,
                             double actual_kbps, nn::Gradients &trunk_grads,
                             nn::Gradients &pn_grads);

struct Sample {
  HistoryWindow window;
  double actual_next_kbps = 0.0;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::size_t> session_starts; // index of each session's first sample
  std::size_t session_count() const noexcept { return session_starts.size(); }
};

struct WindowConfig {
  std::size_t history = kDefaultHistory;
  FilterConfig filter;
  double slot_ms = 1000.0;
};

/// Receiver-side bookkeeping shared by dataset construction and the
/// simulator: smooths slot gradients and keeps the last k observations.
class WindowBuilder {
public:
  explicit WindowBuilder(WindowConfig config = {});
  void push(const SlotObservation &slot);
  bool empty() const noexcept { return throughputs_.empty(); }
  std::size_t slots_seen() const noexcept { return slots_seen_; }
  double smoothed_gradient_ms() const noexcept { return smoothed_; }
  /// Left-pads with the earliest retained observation when fewer than k
  /// slots have been seen; the demanded gradient is the delay filter output
  /// over the padded gradients.
  HistoryWindow window() const;

private:
  WindowConfig config_;
  std::vector<double> throughputs_;
  std::vector<double> gradients_;
  double smoothed_ = 0.0;
  std::size_t slots_seen_ = 0;
};

/// Samples from each trace (one per session). A slot's window predicts the
/// next slot's throughput.
Dataset dataset_from_traces(const std::vector<std::vector<PacketRecord>> &sessions,
                            const WindowConfig &config = {});
/// Groups records by session id, keeping first-appearance order.
std::vector<std::vector<PacketRecord>> split_sessions(std::span<const PacketRecord> records);
/// Synthesizes `sessions` traces from the profile with seeds derived from
/// `seed`.
Dataset dataset_from_profile(const ScenarioProfile &profile, std::size_t sessions,
                             std::uint64_t seed, const WindowConfig &config = {});

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};
/// 80/20 split by whole sessions chosen by `seed`; a single session is split
/// into a leading 80% block and a trailing 20% block.
Split split_dataset(const Dataset &dataset, std::uint64_t seed);

struct TrainConfig {
  std::int64_t epochs = 100;
  double lr_pn = kDefaultLrPn;
  double lr_een = kDefaultLrEen;
  std::uint64_t seed = 1;
  /// Samples per update; gradients are averaged over the batch.
  std::size_t batch_size = 1;
};

struct EpochLosses {
  std::int64_t epoch = 0;
  double loss_pred = 0.0;
  double loss_err = 0.0;
};

struct Metrics {
  double anpe = 0.0;
  double eer = 0.0;
  double cr = 0.0;
};

struct TrainReport {
  std::vector<EpochLosses> epochs;
  Metrics validation;
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
};

Metrics evaluate(const EstimatorModel &model, const Dataset &dataset,
                 std::span<const std::size_t> indices);

/// Runs SGD epochs over shuffled training samples and reports
/// validation metrics. A fresh model's PN output bias is first set to the
/// mean normalized training target. On a non-finite loss the model is
/// restored to its state at the start of the failing epoch and an Error with
/// ErrorCode::kDiverged is thrown.
TrainReport train(EstimatorModel &model, const Dataset &dataset, const TrainConfig &config);

struct ArchRow {
  ArchKind arch = ArchKind::kA;
  Metrics metrics; // mean over seeds
};

/// Trains every architecture with each seed under the same budget.
std::vector<ArchRow> compare_architectures(const Dataset &dataset,
                                           std::span<const std::uint64_t> seeds,
                                           const TrainConfig &config);

void save_model(std::ostream &out, const EstimatorModel &model);
void save_model(const std::string &path, const EstimatorModel &model);
EstimatorModel load_model(std::istream &in);
EstimatorModel load_model(const std::string &path);

} // namespace boundrate
