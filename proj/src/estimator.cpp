// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "boundrate/error.hpp"
#include "boundrate/random.hpp"

namespace boundrate {
namespace {

using nn::LayerSpec;
using nn::Tensor;

constexpr std::size_t kWidth = 64;

std::vector<std::size_t> iota_indices(std::size_t start, std::size_t count) {
  std::vector<std::size_t> v(count);
  std::iota(v.begin(), v.end(), start);
  return v;
}

std::vector<LayerSpec> conv_path(std::size_t offset, std::size_t k) {
  return {LayerSpec::select(iota_indices(offset, k), {k, 1}), LayerSpec::conv1d(kWidth, 3, 1),
          LayerSpec::relu(), LayerSpec::flatten()};
}

std::vector<LayerSpec> demand_path(std::size_t k) {
  return {LayerSpec::select({2 * k}, {1})};
}

std::vector<LayerSpec> recurrent_path(std::size_t k) {
  // Time-major [k, 2]: row t holds (b_t, q_t).
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < k; ++t) {
    idx.push_back(t);
    idx.push_back(k + t);
  }
  return {LayerSpec::select(std::move(idx), {k, 2}), LayerSpec::gru(kWidth, true),
          LayerSpec::gru(kWidth, false)};
}

std::vector<LayerSpec> conv_aggregation(std::size_t k) {
  return {LayerSpec::merge({conv_path(0, k), conv_path(k, k), demand_path(k)}),
          LayerSpec::dense(kWidth), LayerSpec::relu()};
}

std::vector<LayerSpec> trunk_layers(ArchKind kind, std::size_t k) {
  switch (kind) {
  case ArchKind::kA:
    return {LayerSpec::dense(kWidth), LayerSpec::relu(), LayerSpec::dense(kWidth),
            LayerSpec::relu()};
  case ArchKind::kB:
    return conv_aggregation(k);
  case ArchKind::kC:
    return {LayerSpec::merge({recurrent_path(k), demand_path(k)})};
  case ArchKind::kD:
    return {LayerSpec::merge({conv_aggregation(k), recurrent_path(k)})};
  }
  fail(ErrorCode::kInvalidArgument, "unknown architecture");
}

struct Forward {
  nn::Activations trunk;
  nn::Activations pn;
  nn::Activations een;
  double predicted = 0.0; // normalized
  double estimated_error = 0.0;
};

Forward run_forward(const EstimatorModel &model, const HistoryWindow &window) {
  Forward f;
  f.trunk = model.trunk.forward(model.encode(window));
  f.pn = model.pn.forward(f.trunk.output());
  f.een = model.een.forward(f.trunk.output());
  f.predicted = f.pn.output()[0];
  f.estimated_error = f.een.output()[0];
  return f;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// d anpe(y, p) / d p.
double anpe_derivative(double actual, double predicted) {
  const double s = sign(actual - predicted);
  const double mag = std::abs(predicted);
  if (mag > kAnpeFloor)
    return -s / mag - std::abs(actual - predicted) * sign(predicted) / (mag * mag);
  return -s / kAnpeFloor;
}

void check_actual(double actual_kbps) {
  if (!(actual_kbps > 0.0) || !std::isfinite(actual_kbps))
    fail(ErrorCode::kInvalidArgument, "actual throughput must be positive and finite");
}

struct StepGradients {
  nn::Gradients trunk;
  nn::Gradients pn;
  nn::Gradients een;

  explicit StepGradients(const EstimatorModel &model)
      : trunk(model.trunk.zero_gradients()), pn(model.pn.zero_gradients()),
        een(model.een.zero_gradients()) {}
};

double een_loss_into(const EstimatorModel &model, const Forward &f, double actual_norm,
                     nn::Gradients &grads) {
  const double target = std::abs(f.predicted - actual_norm);
  const double diff = target - f.estimated_error;
  const double loss = diff * diff;
  if (!std::isfinite(loss))
    fail(ErrorCode::kDiverged, "non-finite error-estimation loss");
  model.een.backward(f.een, Tensor::vector({-2.0 * diff}), grads);
  return loss;
}

double pn_loss_into(const EstimatorModel &model, const Forward &f, double actual_norm,
                    nn::Gradients &trunk_grads, nn::Gradients &pn_grads) {
  const double loss = anpe(actual_norm, f.predicted);
  if (!std::isfinite(loss) || !std::isfinite(f.estimated_error))
    fail(ErrorCode::kDiverged, "non-finite prediction loss");
  const Tensor grad_h = model.pn.backward(
      f.pn, Tensor::vector({anpe_derivative(actual_norm, f.predicted)}), pn_grads);
  model.trunk.backward(f.trunk, grad_h, trunk_grads);
  return loss;
}

// Adds one sample's PN and EEN gradients, both from a single forward pass.
StepLosses accumulate(const EstimatorModel &model, const HistoryWindow &window,
                      double actual_kbps, StepGradients &grads) {
  check_actual(actual_kbps);
  const double y = actual_kbps / model.norm.throughput_kbps;
  const auto f = run_forward(model, window);
  StepLosses losses;
  losses.loss_pred = pn_loss_into(model, f, y, grads.trunk, grads.pn);
  losses.loss_err = een_loss_into(model, f, y, grads.een);
  return losses;
}

void scale_gradients(nn::Gradients &grads, double factor) {
  for (auto &g : grads)
    for (auto &v : g.values())
      v *= factor;
}

void apply(EstimatorModel &model, const StepGradients &grads, double lr_pn, double lr_een) {
  nn::sgd_step(model.pn.params(), grads.pn, lr_pn);
  nn::sgd_step(model.trunk.params(), grads.trunk, lr_pn);
  nn::sgd_step(model.een.params(), grads.een, lr_een);
}

} // namespace

const char *arch_name(ArchKind kind) {
  switch (kind) {
  case ArchKind::kA:
    return "A";
  case ArchKind::kB:
    return "B";
  case ArchKind::kC:
    return "C";
  case ArchKind::kD:
    return "D";
  }
  return "?";
}

std::optional<ArchKind> parse_arch(std::string_view text) {
  for (auto kind : kAllArchs)
    if (text == arch_name(kind) || (text.size() == 1 && text[0] == arch_name(kind)[0] + 32))
      return kind;
  return std::nullopt;
}

void HistoryWindow::validate(std::size_t k) const {
  if (throughputs_kbps.size() != k || delay_gradients_ms.size() != k)
    fail(ErrorCode::kShape, "history window must hold " + std::to_string(k) + " slots");
  for (std::size_t i = 0; i < k; ++i)
    if (!std::isfinite(throughputs_kbps[i]) || !std::isfinite(delay_gradients_ms[i]))
      fail(ErrorCode::kInvalidArgument, "history window contains non-finite values");
  if (!std::isfinite(demanded_gradient_ms))
    fail(ErrorCode::kInvalidArgument, "demanded gradient is not finite");
}

Tensor EstimatorModel::encode(const HistoryWindow &window) const {
  window.validate(history);
  Tensor x({2 * history + 1});
  for (std::size_t i = 0; i < history; ++i) {
    x[i] = window.throughputs_kbps[i] / norm.throughput_kbps;
    x[history + i] = window.delay_gradients_ms[i] / norm.gradient_ms;
  }
  x[2 * history] = window.demanded_gradient_ms / norm.gradient_ms;
  return x;
}

std::size_t EstimatorModel::parameter_count() const {
  return trunk.params().scalar_count() + pn.params().scalar_count() +
         een.params().scalar_count();
}

EstimatorModel build_architecture(ArchKind kind, std::uint64_t seed, std::size_t history) {
  if (history < 3)
    fail(ErrorCode::kInvalidArgument, "history length must be at least 3");
  EstimatorModel m;
  m.arch = kind;
  m.history = history;
  m.trunk = nn::Network("trunk", {2 * history + 1}, trunk_layers(kind, history),
                        derive_seed(seed, 1));
  m.pn = nn::Network("pn", m.trunk.output_shape(), {LayerSpec::dense(1)}, derive_seed(seed, 2));
  m.een = nn::Network("een", m.trunk.output_shape(), {LayerSpec::dense(1)}, derive_seed(seed, 3));
  return m;
}

RatePrediction predict(const EstimatorModel &model, const HistoryWindow &window) {
  const auto f = run_forward(model, window);
  if (!std::isfinite(f.predicted) || !std::isfinite(f.estimated_error))
    fail(ErrorCode::kNumeric, "model produced a non-finite output");
  RatePrediction p;
  p.baseline_kbps = f.predicted * model.norm.throughput_kbps;
  p.half_width_kbps =
      std::max(kMinHalfWidthKbps, std::abs(f.estimated_error) * model.norm.throughput_kbps);
  return p;
}

double anpe(double actual, double predicted, double floor) {
  return std::abs(actual - predicted) / std::max(std::abs(predicted), floor);
}

double eer(std::span<const double> estimated_errors, std::span<const double> actual_errors) {
  if (estimated_errors.size() != actual_errors.size())
    fail(ErrorCode::kInvalidArgument, "eer: length mismatch");
  if (estimated_errors.empty())
    fail(ErrorCode::kInvalidArgument, "eer: empty input");
  double sq = 0.0;
  for (std::size_t i = 0; i < estimated_errors.size(); ++i) {
    const double d = estimated_errors[i] - actual_errors[i];
    sq += d * d;
  }
  return 1.0 - std::sqrt(sq / static_cast<double>(estimated_errors.size()));
}

double coverage_rate(std::span<const RatePrediction> predictions,
                     std::span<const double> actuals_kbps) {
  if (predictions.size() != actuals_kbps.size())
    fail(ErrorCode::kInvalidArgument, "coverage_rate: length mismatch");
  if (predictions.empty())
    fail(ErrorCode::kInvalidArgument, "coverage_rate: empty input");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (actuals_kbps[i] >= predictions[i].lower_kbps() &&
        actuals_kbps[i] <= predictions[i].upper_kbps())
      ++inside;
  return static_cast<double>(inside) / static_cast<double>(predictions.size());
}

StepLosses train_step(EstimatorModel &model, const HistoryWindow &window, double actual_kbps,
                      double lr_pn, double lr_een) {
  if (!(lr_pn > 0.0) || !(lr_een > 0.0))
    fail(ErrorCode::kInvalidArgument, "learning rates must be positive");
  StepGradients grads(model);
  const auto losses = accumulate(model, window, actual_kbps, grads);
  apply(model, grads, lr_pn, lr_een);
  return losses;
}

double een_step(EstimatorModel &model, const HistoryWindow &window, double actual_kbps,
                double lr_een) {
  check_actual(actual_kbps);
  if (!(lr_een > 0.0))
    fail(ErrorCode::kInvalidArgument, "learning rates must be positive");
  const auto f = run_forward(model, window);
  auto grads = model.een.zero_gradients();
  const double loss =
      een_loss_into(model, f, actual_kbps / model.norm.throughput_kbps, grads);
  nn::sgd_step(model.een.params(), grads, lr_een);
  return loss;
}

double pn_loss_and_gradients(const EstimatorModel &model, const HistoryWindow &window,
                             double actual_kbps, nn::Gradients &trunk_grads,
                             nn::Gradients &pn_grads) {
  check_actual(actual_kbps);
  const auto f = run_forward(model, window);
  trunk_grads = model.trunk.zero_gradients();
  pn_grads = model.pn.zero_gradients();
  return pn_loss_into(model, f, actual_kbps / model.norm.throughput_kbps, trunk_grads,
                      pn_grads);
}

Metrics evaluate(const EstimatorModel &model, const Dataset &dataset,
                 std::span<const std::size_t> indices) {
  if (indices.empty())
    fail(ErrorCode::kInvalidArgument, "cannot evaluate on an empty sample set");
  const double scale = model.norm.throughput_kbps;
  std::vector<RatePrediction> preds;
  std::vector<double> actuals, estimated, actual_errors;
  double anpe_sum = 0.0;
  for (auto i : indices) {
    const auto &s = dataset.samples.at(i);
    const auto p = predict(model, s.window);
    preds.push_back(p);
    actuals.push_back(s.actual_next_kbps);
    estimated.push_back(p.half_width_kbps / scale);
    actual_errors.push_back(std::abs(p.baseline_kbps - s.actual_next_kbps) / scale);
    anpe_sum += anpe(s.actual_next_kbps / scale, p.baseline_kbps / scale);
  }
  Metrics m;
  m.anpe = anpe_sum / static_cast<double>(indices.size());
  m.eer = eer(estimated, actual_errors);
  m.cr = coverage_rate(preds, actuals);
  return m;
}

TrainReport train(EstimatorModel &model, const Dataset &dataset, const TrainConfig &config) {
  if (dataset.samples.empty())
    fail(ErrorCode::kInvalidArgument, "training dataset is empty");
  if (config.epochs < 0)
    fail(ErrorCode::kInvalidArgument, "epoch count must be non-negative");
  if (!(config.lr_pn > 0.0) || !(config.lr_een > 0.0))
    fail(ErrorCode::kInvalidArgument, "learning rates must be positive");
  if (config.batch_size == 0)
    fail(ErrorCode::kInvalidArgument, "batch size must be positive");
  const auto split = split_dataset(dataset, config.seed);
  const double scale = model.norm.throughput_kbps;

  if (model.epochs_trained == 0 && config.epochs > 0) {
    double mean = 0.0;
    for (auto i : split.train)
      mean += dataset.samples[i].actual_next_kbps / scale;
    mean /= static_cast<double>(split.train.size());
    auto bias = model.pn.params().find("pn.0.dense.b");
    model.pn.params()[*bias].value[0] = mean;
  }

  TrainReport report;
  report.train_samples = split.train.size();
  report.validation_samples = split.validation.size();
  std::vector<std::size_t> order = split.train;
  for (std::int64_t e = 0; e < config.epochs; ++e) {
    const std::int64_t epoch = model.epochs_trained;
    const auto saved_trunk = model.trunk.params();
    const auto saved_pn = model.pn.params();
    const auto saved_een = model.een.params();

    order = split.train;
    Rng rng(derive_seed(config.seed, 0x1000 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    EpochLosses losses{epoch + 1, 0.0, 0.0};
    try {
      for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
        const std::size_t end = std::min(order.size(), begin + config.batch_size);
        StepGradients grads(model);
        for (std::size_t i = begin; i < end; ++i) {
          const auto &s = dataset.samples[order[i]];
          const auto step = accumulate(model, s.window, s.actual_next_kbps, grads);
          losses.loss_pred += step.loss_pred;
          losses.loss_err += step.loss_err;
        }
        if (end - begin > 1) {
          const double inv = 1.0 / static_cast<double>(end - begin);
          scale_gradients(grads.trunk, inv);
          scale_gradients(grads.pn, inv);
          scale_gradients(grads.een, inv);
        }
        apply(model, grads, config.lr_pn, config.lr_een);
      }
      if (!std::isfinite(losses.loss_pred) || !std::isfinite(losses.loss_err))
        fail(ErrorCode::kDiverged, "non-finite epoch loss");
    } catch (const Error &err) {
      if (err.code() != ErrorCode::kDiverged && err.code() != ErrorCode::kNumeric)
        throw;
      model.trunk.params() = saved_trunk;
      model.pn.params() = saved_pn;
      model.een.params() = saved_een;
      fail(ErrorCode::kDiverged, "training diverged in epoch " + std::to_string(epoch + 1) +
                                     "; model restored to epoch " + std::to_string(epoch));
    }
    losses.loss_pred /= static_cast<double>(order.size());
    losses.loss_err /= static_cast<double>(order.size());
    report.epochs.push_back(losses);
    ++model.epochs_trained;
  }
  report.validation = evaluate(model, dataset, split.validation);
  return report;
}

std::vector<ArchRow> compare_architectures(const Dataset &dataset,
                                           std::span<const std::uint64_t> seeds,
                                           const TrainConfig &config) {
  if (dataset.samples.empty())
    fail(ErrorCode::kInvalidArgument, "comparison dataset is empty");
  if (seeds.empty())
    fail(ErrorCode::kInvalidArgument, "at least one seed is required");
  const std::size_t k = dataset.samples.front().window.size();
  std::vector<ArchRow> rows;
  for (auto kind : kAllArchs) {
    ArchRow row{kind, {}};
    for (auto seed : seeds) {
      auto model = build_architecture(kind, seed, k);
      auto cfg = config;
      cfg.seed = seed;
      const auto report = train(model, dataset, cfg);
      row.metrics.anpe += report.validation.anpe;
      row.metrics.eer += report.validation.eer;
      row.metrics.cr += report.validation.cr;
    }
    const double n = static_cast<double>(seeds.size());
    row.metrics.anpe /= n;
    row.metrics.eer /= n;
    row.metrics.cr /= n;
    rows.push_back(row);
  }
  return rows;
}

} // namespace boundrate
