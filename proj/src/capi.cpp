// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/boundrate.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "boundrate/control.hpp"
#include "boundrate/error.hpp"
#include "boundrate/estimator.hpp"
#include "boundrate/eval.hpp"
#include "boundrate/manifest.hpp"
#include "boundrate/profile.hpp"
#include "boundrate/sim.hpp"
#include "boundrate/trace.hpp"

struct br_profile {
  boundrate::ScenarioProfile value;
};
struct br_dataset {
  boundrate::Dataset value;
};
struct br_model {
  boundrate::EstimatorModel value;
};
struct br_train_report {
  boundrate::TrainReport value;
};
struct br_session {
  boundrate::SessionLog value;
};
struct br_report {
  std::vector<boundrate::NamedMetrics> entries;
};

namespace {

thread_local std::string g_last_error;

br_status to_status(boundrate::ErrorCode code) {
  switch (code) {
  case boundrate::ErrorCode::kInvalidArgument:
    return BR_ERR_INVALID_ARGUMENT;
  case boundrate::ErrorCode::kParse:
    return BR_ERR_PARSE;
  case boundrate::ErrorCode::kIo:
    return BR_ERR_IO;
  case boundrate::ErrorCode::kShape:
    return BR_ERR_SHAPE;
  case boundrate::ErrorCode::kNumeric:
    return BR_ERR_NUMERIC;
  case boundrate::ErrorCode::kDiverged:
    return BR_ERR_DIVERGED;
  case boundrate::ErrorCode::kState:
    return BR_ERR_STATE;
  }
  return BR_ERR_INTERNAL;
}

template <typename F> br_status guard(F &&body) {
  try {
    body();
    g_last_error.clear();
    return BR_OK;
  } catch (const boundrate::Error &e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return BR_ERR_INTERNAL;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return BR_ERR_INTERNAL;
  }
}

void require(const void *p, const char *what) {
  if (p == nullptr)
    boundrate::fail(boundrate::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char *dup_string(const std::string &s) {
  char *out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

boundrate::WindowConfig window_config(const br_window_config *c) {
  boundrate::WindowConfig w;
  if (c) {
    w.history = c->history;
    w.filter.alpha = c->alpha;
    w.filter.smoothing = c->smoothing;
    w.slot_ms = c->slot_ms;
  }
  return w;
}

boundrate::TrainConfig train_config(const br_train_config *c) {
  boundrate::TrainConfig t;
  if (c) {
    t.epochs = c->epochs;
    t.lr_pn = c->lr_pn;
    t.lr_een = c->lr_een;
    t.seed = c->seed;
    t.batch_size = c->batch_size;
  }
  return t;
}

br_metrics to_c(const boundrate::Metrics &m) { return {m.anpe, m.eer, m.cr}; }

br_session_metrics to_c(const boundrate::SessionMetrics &m) {
  return {m.usi,      m.utilization,       m.sigma_throughput_kbps, m.mean_latency_ms,
          m.sigma_latency_ms, m.mean_bitrate_kbps, m.jitter_ms, m.rtt_s};
}

boundrate::SessionMetrics from_c(const br_session_metrics &m) {
  boundrate::SessionMetrics s;
  s.usi = m.usi;
  s.utilization = m.utilization;
  s.sigma_throughput_kbps = m.sigma_t;
  s.mean_latency_ms = m.mean_latency;
  s.sigma_latency_ms = m.sigma_l;
  s.mean_bitrate_kbps = m.mean_bitrate;
  s.jitter_ms = m.jitter;
  s.rtt_s = m.rtt;
  return s;
}

} // namespace

extern "C" {

const char *br_version(void) { return BOUNDRATE_VERSION; }

const char *br_status_name(br_status status) {
  switch (status) {
  case BR_OK:
    return "ok";
  case BR_ERR_INVALID_ARGUMENT:
    return "invalid-argument";
  case BR_ERR_PARSE:
    return "parse";
  case BR_ERR_IO:
    return "io";
  case BR_ERR_SHAPE:
    return "shape";
  case BR_ERR_NUMERIC:
    return "numeric";
  case BR_ERR_DIVERGED:
    return "diverged";
  case BR_ERR_STATE:
    return "state";
  case BR_ERR_INTERNAL:
    return "internal";
  }
  return "unknown";
}

const char *br_last_error(void) { return g_last_error.c_str(); }

void br_string_free(char *text) { delete[] text; }

size_t br_profile_builtin_count(void) { return boundrate::named_profile_names().size(); }

const char *br_profile_builtin_name(size_t index) {
  static const auto names = boundrate::named_profile_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

br_status br_profile_resolve(const char *name_or_path, br_profile **out) {
  return guard([&] {
    require(name_or_path, "profile name");
    require(out, "output handle");
    *out = new br_profile{boundrate::resolve_profile(name_or_path)};
  });
}

br_status br_profile_set(br_profile *profile, const char *key, const char *value) {
  return guard([&] {
    require(profile, "profile");
    require(key, "key");
    require(value, "value");
    auto copy = profile->value;
    boundrate::set_profile_value(copy, key, value);
    copy.validate();
    profile->value = std::move(copy);
  });
}

br_status br_profile_serialize(const br_profile *profile, char **out_text) {
  return guard([&] {
    require(profile, "profile");
    require(out_text, "output string");
    *out_text = dup_string(boundrate::serialize_profile(profile->value));
  });
}

double br_profile_duration_ms(const br_profile *profile) {
  return profile ? profile->value.duration_ms : 0.0;
}

void br_profile_free(br_profile *profile) { delete profile; }

br_status br_synth_trace(const br_profile *profile, uint64_t seed, double duration_ms,
                         const char *csv_path, br_synth_stats *stats) {
  return guard([&] {
    require(profile, "profile");
    require(csv_path, "csv path");
    const auto trace = boundrate::synth_trace_detailed(profile->value, seed, duration_ms);
    boundrate::save_trace(csv_path, trace.records);
    if (stats)
      *stats = {trace.packets_sent, static_cast<int64_t>(trace.records.size()),
                trace.random_losses, trace.overflow_drops};
  });
}

br_window_config br_window_config_default(void) {
  const boundrate::WindowConfig w;
  return {w.history, w.filter.alpha, w.filter.smoothing, w.slot_ms};
}

br_status br_dataset_from_profile(const br_profile *profile, size_t sessions, uint64_t seed,
                                  const br_window_config *config, br_dataset **out) {
  return guard([&] {
    require(profile, "profile");
    require(out, "output handle");
    *out = new br_dataset{
        boundrate::dataset_from_profile(profile->value, sessions, seed, window_config(config))};
  });
}

br_status br_dataset_from_trace(const char *csv_path, const br_window_config *config,
                                br_dataset **out) {
  return guard([&] {
    require(csv_path, "csv path");
    require(out, "output handle");
    const auto records = boundrate::load_trace(csv_path);
    *out = new br_dataset{boundrate::dataset_from_traces(boundrate::split_sessions(records),
                                                         window_config(config))};
  });
}

size_t br_dataset_samples(const br_dataset *dataset) {
  return dataset ? dataset->value.samples.size() : 0;
}

size_t br_dataset_sessions(const br_dataset *dataset) {
  return dataset ? dataset->value.session_count() : 0;
}

void br_dataset_free(br_dataset *dataset) { delete dataset; }

br_status br_arch_parse(const char *text, br_arch *out) {
  return guard([&] {
    require(text, "architecture");
    require(out, "output");
    const auto kind = boundrate::parse_arch(text);
    if (!kind)
      boundrate::fail(boundrate::ErrorCode::kInvalidArgument,
                      std::string("unknown architecture '") + text + "' (expected A, B, C or D)");
    *out = static_cast<br_arch>(*kind);
  });
}

const char *br_arch_name(br_arch arch) {
  if (arch < BR_ARCH_A || arch > BR_ARCH_D)
    return "?";
  return boundrate::arch_name(static_cast<boundrate::ArchKind>(arch));
}

br_status br_model_create(br_arch arch, uint64_t seed, size_t history, br_model **out) {
  return guard([&] {
    require(out, "output handle");
    if (arch < BR_ARCH_A || arch > BR_ARCH_D)
      boundrate::fail(boundrate::ErrorCode::kInvalidArgument, "unknown architecture");
    *out = new br_model{
        boundrate::build_architecture(static_cast<boundrate::ArchKind>(arch), seed, history)};
  });
}

br_status br_model_load(const char *path, br_model **out) {
  return guard([&] {
    require(path, "model path");
    require(out, "output handle");
    *out = new br_model{boundrate::load_model(std::string(path))};
  });
}

br_status br_model_save(const br_model *model, const char *path) {
  return guard([&] {
    require(model, "model");
    require(path, "model path");
    boundrate::save_model(std::string(path), model->value);
  });
}

br_arch br_model_arch(const br_model *model) {
  return model ? static_cast<br_arch>(model->value.arch) : BR_ARCH_A;
}

size_t br_model_history(const br_model *model) { return model ? model->value.history : 0; }

int64_t br_model_epochs_trained(const br_model *model) {
  return model ? model->value.epochs_trained : 0;
}

size_t br_model_parameter_count(const br_model *model) {
  return model ? model->value.parameter_count() : 0;
}

br_status br_model_predict(const br_model *model, const br_window *window, br_prediction *out) {
  return guard([&] {
    require(model, "model");
    require(window, "window");
    require(out, "output");
    require(window->throughputs_kbps, "throughputs");
    require(window->delay_gradients_ms, "delay gradients");
    boundrate::HistoryWindow w;
    w.throughputs_kbps.assign(window->throughputs_kbps,
                              window->throughputs_kbps + window->length);
    w.delay_gradients_ms.assign(window->delay_gradients_ms,
                                window->delay_gradients_ms + window->length);
    w.demanded_gradient_ms = window->demanded_gradient_ms;
    const auto p = boundrate::predict(model->value, w);
    *out = {p.baseline_kbps, p.half_width_kbps};
  });
}

void br_model_free(br_model *model) { delete model; }

br_train_config br_train_config_default(void) {
  const boundrate::TrainConfig t;
  return {t.epochs, t.lr_pn, t.lr_een, t.seed, t.batch_size};
}

br_status br_model_train(br_model *model, const br_dataset *dataset,
                         const br_train_config *config, br_train_report **out) {
  if (out)
    *out = nullptr;
  return guard([&] {
    require(model, "model");
    require(dataset, "dataset");
    require(out, "output handle");
    *out = new br_train_report{
        boundrate::train(model->value, dataset->value, train_config(config))};
  });
}

size_t br_train_report_epochs(const br_train_report *report) {
  return report ? report->value.epochs.size() : 0;
}

br_status br_train_report_epoch(const br_train_report *report, size_t index,
                                br_epoch_loss *out) {
  return guard([&] {
    require(report, "report");
    require(out, "output");
    if (index >= report->value.epochs.size())
      boundrate::fail(boundrate::ErrorCode::kInvalidArgument, "epoch index out of range");
    const auto &e = report->value.epochs[index];
    *out = {e.epoch, e.loss_pred, e.loss_err};
  });
}

br_metrics br_train_report_validation(const br_train_report *report) {
  return report ? to_c(report->value.validation) : br_metrics{0.0, 0.0, 0.0};
}

size_t br_train_report_train_samples(const br_train_report *report) {
  return report ? report->value.train_samples : 0;
}

size_t br_train_report_validation_samples(const br_train_report *report) {
  return report ? report->value.validation_samples : 0;
}

void br_train_report_free(br_train_report *report) { delete report; }

br_status br_compare_architectures(const br_dataset *dataset, const uint64_t *seeds,
                                   size_t seed_count, const br_train_config *config,
                                   br_metrics out[4]) {
  return guard([&] {
    require(dataset, "dataset");
    require(seeds, "seeds");
    require(out, "output");
    const auto rows = boundrate::compare_architectures(
        dataset->value, std::span<const uint64_t>(seeds, seed_count), train_config(config));
    for (const auto &row : rows)
      out[static_cast<int>(row.arch)] = to_c(row.metrics);
  });
}

br_sim_config br_sim_config_default(void) {
  const boundrate::SimConfig s;
  return {s.slot_ms,          s.filter.alpha,  s.filter.smoothing,
          s.initial_kbps,     s.floor_kbps,    s.cvbr_interval_ms,
          s.switch_window,    s.switch_threshold, s.loss_compensation ? 1 : 0};
}

br_status br_simulate(const br_profile *profile, const char *controller, const br_model *model,
                      uint64_t seed, const br_sim_config *config, br_session **out) {
  return guard([&] {
    require(profile, "profile");
    require(controller, "controller");
    require(out, "output handle");
    boundrate::SimConfig s;
    if (config) {
      s.slot_ms = config->slot_ms;
      s.filter.alpha = config->alpha;
      s.filter.smoothing = config->smoothing;
      s.initial_kbps = config->initial_kbps;
      s.floor_kbps = config->floor_kbps;
      s.cvbr_interval_ms = config->cvbr_interval_ms;
      s.switch_window = config->switch_window;
      s.switch_threshold = config->switch_threshold;
      s.loss_compensation = config->loss_compensation != 0;
    }
    const auto spec = boundrate::ControllerSpec::parse(controller);
    *out = new br_session{boundrate::run_session(profile->value, spec,
                                                 model ? &model->value : nullptr, seed, s)};
  });
}

br_status br_controller_check(const char *controller, int *needs_model) {
  return guard([&] {
    require(controller, "controller");
    const auto spec = boundrate::ControllerSpec::parse(controller);
    if (needs_model)
      *needs_model = spec.needs_model() ? 1 : 0;
  });
}

size_t br_session_slots(const br_session *session) {
  return session ? session->value.slots.size() : 0;
}

br_status br_session_metrics_get(const br_session *session, br_session_metrics *out) {
  return guard([&] {
    require(session, "session");
    require(out, "output");
    *out = to_c(boundrate::session_metrics(session->value));
  });
}

br_status br_session_write_csv(const br_session *session, const char *path) {
  return guard([&] {
    require(session, "session");
    require(path, "csv path");
    std::ofstream f(path);
    if (!f)
      boundrate::fail(boundrate::ErrorCode::kIo, std::string("cannot write '") + path + "'");
    boundrate::write_session_csv(f, session->value);
  });
}

br_status br_session_summary_json(const br_session *session, char **out_json) {
  return guard([&] {
    require(session, "session");
    require(out_json, "output string");
    *out_json = dup_string(boundrate::session_summary_json(session->value));
  });
}

void br_session_free(br_session *session) { delete session; }

br_status br_average_metrics(const br_session_metrics *items, size_t count,
                             br_session_metrics *out) {
  return guard([&] {
    require(items, "metrics");
    require(out, "output");
    std::vector<boundrate::SessionMetrics> v;
    for (size_t i = 0; i < count; ++i)
      v.push_back(from_c(items[i]));
    *out = to_c(boundrate::average_metrics(v));
  });
}

br_status br_usi(double bitrate_kbps, double jitter_ms, double rtt_s, double *out) {
  return guard([&] {
    require(out, "output");
    *out = boundrate::usi(bitrate_kbps, jitter_ms, rtt_s);
  });
}

br_status br_report_create(br_report **out) {
  return guard([&] {
    require(out, "output handle");
    *out = new br_report{};
  });
}

br_status br_report_add(br_report *report, const char *name, const br_session_metrics *metrics,
                        const char *profile, const char *controller, uint64_t seed) {
  return guard([&] {
    require(report, "report");
    require(name, "name");
    require(metrics, "metrics");
    report->entries.push_back({name, from_c(*metrics), profile ? profile : "",
                               controller ? controller : "", seed});
  });
}

br_status br_report_write(const br_report *report, const char *csv_path, const char *json_path) {
  return guard([&] {
    require(report, "report");
    const auto r = boundrate::compare_report(report->entries);
    if (csv_path) {
      std::ofstream f(csv_path);
      if (!f)
        boundrate::fail(boundrate::ErrorCode::kIo, std::string("cannot write '") + csv_path + "'");
      boundrate::write_report_csv(f, r);
    }
    if (json_path) {
      std::ofstream f(json_path);
      if (!f)
        boundrate::fail(boundrate::ErrorCode::kIo,
                        std::string("cannot write '") + json_path + "'");
      f << boundrate::report_json(r) << '\n';
    }
  });
}

void br_report_free(br_report *report) { delete report; }

br_status br_feedback_encode(const br_feedback *message, uint8_t out[BR_FEEDBACK_WIRE_SIZE]) {
  return guard([&] {
    require(message, "message");
    require(out, "output");
    const auto bytes = boundrate::encode_feedback({message->slot_index, message->baseline_kbps,
                                                   message->half_width_kbps,
                                                   message->demanded_gradient_ms});
    std::memcpy(out, bytes.data(), bytes.size());
  });
}

br_status br_feedback_decode(const uint8_t *bytes, size_t length, br_feedback *out) {
  return guard([&] {
    require(bytes, "bytes");
    require(out, "output");
    const auto m = boundrate::decode_feedback(std::span<const uint8_t>(bytes, length));
    *out = {m.slot_index, m.baseline_kbps, m.half_width_kbps, m.demanded_gradient_ms};
  });
}

br_status br_sha256_file(const char *path, char out_hex[65]) {
  return guard([&] {
    require(path, "path");
    require(out_hex, "output");
    const auto hex = boundrate::sha256_file(path);
    std::memcpy(out_hex, hex.c_str(), 65);
  });
}

br_status br_write_manifest(const char *dir, const char *command, const char *config_json,
                            const char *const *artifacts, size_t artifact_count) {
  return guard([&] {
    require(dir, "directory");
    require(command, "command");
    require(config_json, "config");
    if (artifact_count > 0)
      require(artifacts, "artifacts");
    std::vector<std::string> paths;
    for (size_t i = 0; i < artifact_count; ++i) {
      require(artifacts[i], "artifact path");
      paths.emplace_back(artifacts[i]);
    }
    boundrate::write_manifest(dir, command, config_json, paths);
  });
}

} // extern "C"
