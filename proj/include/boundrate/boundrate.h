/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The boundrate Authors */

#ifndef BOUNDRATE_BOUNDRATE_H
#define BOUNDRATE_BOUNDRATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BR_API __declspec(dllexport)
#else
#define BR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum br_status {
  BR_OK = 0,
  BR_ERR_INVALID_ARGUMENT = 1,
  BR_ERR_PARSE = 2,
  BR_ERR_IO = 3,
  BR_ERR_SHAPE = 4,
  BR_ERR_NUMERIC = 5,
  BR_ERR_DIVERGED = 6,
  BR_ERR_STATE = 7,
  BR_ERR_INTERNAL = 99
} br_status;

BR_API const char *br_version(void);
BR_API const char *br_status_name(br_status status);
/* Message of the last failed call on this thread; "" if none. */
BR_API const char *br_last_error(void);
/* Frees strings returned through char ** out-parameters. */
BR_API void br_string_free(char *text);

/* ---- Scenario profiles ------------------------------------------------ */

typedef struct br_profile br_profile;

BR_API size_t br_profile_builtin_count(void);
BR_API const char *br_profile_builtin_name(size_t index);
/* Built-in name first, then a profile file path. */
BR_API br_status br_profile_resolve(const char *name_or_path, br_profile **out);
BR_API br_status br_profile_set(br_profile *profile, const char *key, const char *value);
BR_API br_status br_profile_serialize(const br_profile *profile, char **out_text);
BR_API double br_profile_duration_ms(const br_profile *profile);
BR_API void br_profile_free(br_profile *profile);

/* ---- Traces ----------------------------------------------------------- */

typedef struct br_synth_stats {
  int64_t packets_sent;
  int64_t packets_received;
  int64_t random_losses;
  int64_t overflow_drops;
} br_synth_stats;

/* Writes a packet trace CSV; `stats` may be NULL. */
BR_API br_status br_synth_trace(const br_profile *profile, uint64_t seed, double duration_ms,
                                const char *csv_path, br_synth_stats *stats);

/* ---- Datasets --------------------------------------------------------- */

typedef struct br_window_config {
  size_t history;
  double alpha;
  double smoothing;
  double slot_ms;
} br_window_config;

typedef struct br_dataset br_dataset;

BR_API br_window_config br_window_config_default(void);
BR_API br_status br_dataset_from_profile(const br_profile *profile, size_t sessions,
                                         uint64_t seed, const br_window_config *config,
                                         br_dataset **out);
/* One session per distinct session id in the CSV. */
BR_API br_status br_dataset_from_trace(const char *csv_path, const br_window_config *config,
                                       br_dataset **out);
BR_API size_t br_dataset_samples(const br_dataset *dataset);
BR_API size_t br_dataset_sessions(const br_dataset *dataset);
BR_API void br_dataset_free(br_dataset *dataset);

/* ---- Estimator models ------------------------------------------------- */

typedef enum br_arch { BR_ARCH_A = 0, BR_ARCH_B = 1, BR_ARCH_C = 2, BR_ARCH_D = 3 } br_arch;

typedef struct br_model br_model;

typedef struct br_window {
  const double *throughputs_kbps;
  const double *delay_gradients_ms;
  size_t length;
  double demanded_gradient_ms;
} br_window;

typedef struct br_prediction {
  double baseline_kbps;
  double half_width_kbps;
} br_prediction;

typedef struct br_train_config {
  int64_t epochs;
  double lr_pn;
  double lr_een;
  uint64_t seed;
  size_t batch_size; /* samples per gradient step */
} br_train_config;

typedef struct br_metrics {
  double anpe;
  double eer;
  double cr;
} br_metrics;

typedef struct br_epoch_loss {
  int64_t epoch;
  double loss_pred;
  double loss_err;
} br_epoch_loss;

typedef struct br_train_report br_train_report;

BR_API br_status br_arch_parse(const char *text, br_arch *out);
BR_API const char *br_arch_name(br_arch arch);

BR_API br_status br_model_create(br_arch arch, uint64_t seed, size_t history, br_model **out);
BR_API br_status br_model_load(const char *path, br_model **out);
BR_API br_status br_model_save(const br_model *model, const char *path);
BR_API br_arch br_model_arch(const br_model *model);
BR_API size_t br_model_history(const br_model *model);
BR_API int64_t br_model_epochs_trained(const br_model *model);
BR_API size_t br_model_parameter_count(const br_model *model);
BR_API br_status br_model_predict(const br_model *model, const br_window *window,
                                  br_prediction *out);
BR_API void br_model_free(br_model *model);

BR_API br_train_config br_train_config_default(void);
/* On BR_ERR_DIVERGED the model holds its last good parameters and *out is
   NULL. */
BR_API br_status br_model_train(br_model *model, const br_dataset *dataset,
                                const br_train_config *config, br_train_report **out);
BR_API size_t br_train_report_epochs(const br_train_report *report);
BR_API br_status br_train_report_epoch(const br_train_report *report, size_t index,
                                       br_epoch_loss *out);
BR_API br_metrics br_train_report_validation(const br_train_report *report);
BR_API size_t br_train_report_train_samples(const br_train_report *report);
BR_API size_t br_train_report_validation_samples(const br_train_report *report);
BR_API void br_train_report_free(br_train_report *report);

/* Fills out[0..3] for architectures A..D, each averaged over the seeds. */
BR_API br_status br_compare_architectures(const br_dataset *dataset, const uint64_t *seeds,
                                          size_t seed_count, const br_train_config *config,
                                          br_metrics out[4]);

/* ---- Simulation and evaluation --------------------------------------- */

typedef struct br_sim_config {
  double slot_ms;
  double alpha;
  double smoothing;
  double initial_kbps;
  double floor_kbps;
  double cvbr_interval_ms;
  size_t switch_window;
  double switch_threshold;
  int loss_compensation;
} br_sim_config;

typedef struct br_session_metrics {
  double usi;
  double utilization;
  double sigma_t;
  double mean_latency;
  double sigma_l;
  double mean_bitrate;
  double jitter;
  double rtt;
} br_session_metrics;

typedef struct br_session br_session;
typedef struct br_report br_report;

BR_API br_sim_config br_sim_config_default(void);
/* controller: bounded, no-range, fixed-range:<kbps>, aimd, constant:<kbps>.
   `model` may be NULL for aimd and constant. */
BR_API br_status br_simulate(const br_profile *profile, const char *controller,
                             const br_model *model, uint64_t seed, const br_sim_config *config,
                             br_session **out);
/* Validates a controller string; `needs_model` may be NULL. */
BR_API br_status br_controller_check(const char *controller, int *needs_model);
BR_API size_t br_session_slots(const br_session *session);
BR_API br_status br_session_metrics_get(const br_session *session, br_session_metrics *out);
BR_API br_status br_session_write_csv(const br_session *session, const char *path);
BR_API br_status br_session_summary_json(const br_session *session, char **out_json);
BR_API void br_session_free(br_session *session);

BR_API br_status br_average_metrics(const br_session_metrics *items, size_t count,
                                    br_session_metrics *out);
BR_API br_status br_usi(double bitrate_kbps, double jitter_ms, double rtt_s, double *out);

BR_API br_status br_report_create(br_report **out);
BR_API br_status br_report_add(br_report *report, const char *name,
                               const br_session_metrics *metrics, const char *profile,
                               const char *controller, uint64_t seed);
/* Needs at least two entries; either path may be NULL. */
BR_API br_status br_report_write(const br_report *report, const char *csv_path,
                                 const char *json_path);
BR_API void br_report_free(br_report *report);

/* ---- Feedback wire format -------------------------------------------- */

typedef struct br_feedback {
  uint32_t slot_index;
  double baseline_kbps;
  double half_width_kbps;
  double demanded_gradient_ms;
} br_feedback;

#define BR_FEEDBACK_WIRE_SIZE 28
BR_API br_status br_feedback_encode(const br_feedback *message,
                                    uint8_t out[BR_FEEDBACK_WIRE_SIZE]);
BR_API br_status br_feedback_decode(const uint8_t *bytes, size_t length, br_feedback *out);

/* ---- Run manifests ---------------------------------------------------- */

BR_API br_status br_sha256_file(const char *path, char out_hex[65]);
BR_API br_status br_write_manifest(const char *dir, const char *command, const char *config_json,
                                   const char *const *artifacts, size_t artifact_count);

#ifdef __cplusplus
}
#endif

#endif
