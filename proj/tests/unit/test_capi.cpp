// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "boundrate/boundrate.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("boundrate-capi-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

br_profile *profile(const char *name, double duration_ms) {
  br_profile *p = nullptr;
  REQUIRE(br_profile_resolve(name, &p) == BR_OK);
  REQUIRE(br_profile_set(p, "duration_ms", std::to_string(duration_ms).c_str()) == BR_OK);
  return p;
}

} // namespace

TEST_SUITE("capi") {

TEST_CASE("version and status names") {
  CHECK(std::strlen(br_version()) > 0);
  CHECK(std::string(br_status_name(BR_OK)) == "ok");
  CHECK(std::string(br_status_name(BR_ERR_PARSE)).size() > 0);
}

TEST_CASE("null handles and bad names give error codes and a message") {
  br_profile *p = nullptr;
  CHECK(br_profile_resolve(nullptr, &p) == BR_ERR_INVALID_ARGUMENT);
  CHECK(br_profile_resolve("no-such-profile-or-file", &p) != BR_OK);
  CHECK(p == nullptr);
  CHECK(std::strlen(br_last_error()) > 0);
  CHECK(br_controller_check("warp-drive", nullptr) == BR_ERR_INVALID_ARGUMENT);
  br_arch arch;
  CHECK(br_arch_parse("Z", &arch) == BR_ERR_INVALID_ARGUMENT);
  br_model *m = nullptr;
  CHECK(br_model_load("/nonexistent/model.json", &m) != BR_OK);
  CHECK(m == nullptr);
  br_profile_free(nullptr);
  br_model_free(nullptr);
  br_string_free(nullptr);
}

TEST_CASE("profiles resolve, accept overrides and serialize") {
  CHECK(br_profile_builtin_count() >= 4);
  bool found = false;
  for (size_t i = 0; i < br_profile_builtin_count(); ++i)
    found |= std::string(br_profile_builtin_name(i)) == "very-bad-network";
  CHECK(found);
  CHECK(br_profile_builtin_name(br_profile_builtin_count()) == nullptr);
  br_profile *p = profile("emulator-4mbps", 12000);
  CHECK(br_profile_duration_ms(p) == 12000.0);
  CHECK(br_profile_set(p, "loss_rate", "abc") == BR_ERR_PARSE);
  CHECK(br_profile_set(p, "unknown_key", "1") != BR_OK);
  char *text = nullptr;
  REQUIRE(br_profile_serialize(p, &text) == BR_OK);
  CHECK(std::string(text).find("duration_ms = 12000") != std::string::npos);
  br_string_free(text);
  br_profile_free(p);
}

TEST_CASE("controller check reports model needs") {
  int needs = -1;
  CHECK(br_controller_check("bounded", &needs) == BR_OK);
  CHECK(needs == 1);
  CHECK(br_controller_check("constant:500", &needs) == BR_OK);
  CHECK(needs == 0);
}

TEST_CASE("synthesize, build a dataset, train, predict and round-trip a model") {
  const auto dir = scratch("train");
  br_profile *p = profile("train-sinusoid", 30000);
  br_synth_stats stats{};
  const auto trace = (dir / "trace.csv").string();
  REQUIRE(br_synth_trace(p, 3, 30000, trace.c_str(), &stats) == BR_OK);
  CHECK(stats.packets_sent > 0);
  CHECK(stats.packets_received <= stats.packets_sent);

  const auto wc = br_window_config_default();
  CHECK(wc.history == 8);
  br_dataset *d = nullptr;
  REQUIRE(br_dataset_from_profile(p, 3, 7, &wc, &d) == BR_OK);
  CHECK(br_dataset_sessions(d) == 3);
  CHECK(br_dataset_samples(d) > 20);

  br_model *m = nullptr;
  REQUIRE(br_model_create(BR_ARCH_A, 1, 8, &m) == BR_OK);
  CHECK(br_model_arch(m) == BR_ARCH_A);
  CHECK(br_model_parameter_count(m) == 5442);
  auto tc = br_train_config_default();
  tc.epochs = 2;
  br_train_report *r = nullptr;
  REQUIRE(br_model_train(m, d, &tc, &r) == BR_OK);
  CHECK(br_train_report_epochs(r) == 2);
  br_epoch_loss e{};
  REQUIRE(br_train_report_epoch(r, 1, &e) == BR_OK);
  CHECK(e.epoch == 2);
  CHECK(br_train_report_epoch(r, 2, &e) == BR_ERR_INVALID_ARGUMENT);
  CHECK(br_train_report_train_samples(r) + br_train_report_validation_samples(r) ==
        br_dataset_samples(d));
  const auto v = br_train_report_validation(r);
  CHECK(v.cr >= 0.0);
  CHECK(v.cr <= 1.0);
  CHECK(br_model_epochs_trained(m) == 2);

  double b[8], q[8];
  for (int i = 0; i < 8; ++i) {
    b[i] = 1500.0;
    q[i] = 0.0;
  }
  const br_window w{b, q, 8, 0.0};
  br_prediction pa{}, pb{};
  REQUIRE(br_model_predict(m, &w, &pa) == BR_OK);
  CHECK(pa.half_width_kbps >= 1.0);
  const br_window short_w{b, q, 7, 0.0};
  CHECK(br_model_predict(m, &short_w, &pb) == BR_ERR_SHAPE);

  const auto path = (dir / "model.json").string();
  REQUIRE(br_model_save(m, path.c_str()) == BR_OK);
  br_model *back = nullptr;
  REQUIRE(br_model_load(path.c_str(), &back) == BR_OK);
  REQUIRE(br_model_predict(back, &w, &pb) == BR_OK);
  CHECK(pa.baseline_kbps == pb.baseline_kbps);
  CHECK(pa.half_width_kbps == pb.half_width_kbps);
  CHECK(br_model_epochs_trained(back) == 2);

  br_dataset *from_trace = nullptr;
  REQUIRE(br_dataset_from_trace(trace.c_str(), &wc, &from_trace) == BR_OK);
  CHECK(br_dataset_sessions(from_trace) == 1);

  br_dataset_free(from_trace);
  br_model_free(back);
  br_train_report_free(r);
  br_model_free(m);
  br_dataset_free(d);
  br_profile_free(p);
}

TEST_CASE("simulate, score and report") {
  const auto dir = scratch("sim");
  br_profile *p = profile("very-bad-network", 20000);
  const auto cfg = br_sim_config_default();
  br_session *a = nullptr, *b = nullptr;
  CHECK(br_simulate(p, "bounded", nullptr, 1, &cfg, &a) == BR_ERR_INVALID_ARGUMENT);
  REQUIRE(br_simulate(p, "aimd", nullptr, 1, &cfg, &a) == BR_OK);
  REQUIRE(br_simulate(p, "constant:400", nullptr, 1, &cfg, &b) == BR_OK);
  CHECK(br_session_slots(a) >= 18);
  br_session_metrics ma{}, mb{};
  REQUIRE(br_session_metrics_get(a, &ma) == BR_OK);
  REQUIRE(br_session_metrics_get(b, &mb) == BR_OK);
  double expect = 0.0;
  REQUIRE(br_usi(ma.mean_bitrate, ma.jitter, ma.rtt, &expect) == BR_OK);
  CHECK(ma.usi == doctest::Approx(expect));
  CHECK(br_usi(-1, 1, 1, &expect) == BR_ERR_INVALID_ARGUMENT);

  const br_session_metrics both[2] = {ma, mb};
  br_session_metrics avg{};
  REQUIRE(br_average_metrics(both, 2, &avg) == BR_OK);
  CHECK(avg.usi == doctest::Approx((ma.usi + mb.usi) / 2));

  const auto csv = (dir / "session.csv").string();
  REQUIRE(br_session_write_csv(a, csv.c_str()) == BR_OK);
  char *json = nullptr;
  REQUIRE(br_session_summary_json(a, &json) == BR_OK);
  CHECK(nlohmann::json::parse(json)["controller"] == "aimd");
  br_string_free(json);

  br_report *rep = nullptr;
  REQUIRE(br_report_create(&rep) == BR_OK);
  REQUIRE(br_report_add(rep, "aimd", &ma, "very-bad-network", "aimd", 1) == BR_OK);
  CHECK(br_report_write(rep, (dir / "r.csv").string().c_str(), nullptr) == BR_ERR_INVALID_ARGUMENT);
  REQUIRE(br_report_add(rep, "constant", &mb, "very-bad-network", "constant:400", 1) == BR_OK);
  REQUIRE(br_report_write(rep, (dir / "r.csv").string().c_str(),
                          (dir / "r.json").string().c_str()) == BR_OK);
  CHECK(fs::exists(dir / "r.json"));

  br_report_free(rep);
  br_session_free(a);
  br_session_free(b);
  br_profile_free(p);
}

TEST_CASE("feedback through the C surface") {
  const br_feedback f{42, 1800.5, 120.25, -0.5};
  uint8_t bytes[BR_FEEDBACK_WIRE_SIZE];
  REQUIRE(br_feedback_encode(&f, bytes) == BR_OK);
  br_feedback back{};
  REQUIRE(br_feedback_decode(bytes, sizeof bytes, &back) == BR_OK);
  CHECK(back.slot_index == 42);
  CHECK(back.baseline_kbps == 1800.5);
  CHECK(back.half_width_kbps == 120.25);
  CHECK(back.demanded_gradient_ms == -0.5);
  CHECK(br_feedback_decode(bytes, 27, &back) == BR_ERR_PARSE);
}

TEST_CASE("sha256 and manifests") {
  const auto dir = scratch("manifest");
  {
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  }
  char hex[65];
  REQUIRE(br_sha256_file((dir / "abc.txt").string().c_str(), hex) == BR_OK);
  CHECK(std::string(hex) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(br_sha256_file((dir / "missing").string().c_str(), hex) == BR_ERR_IO);

  const auto artifact = (dir / "abc.txt").string();
  const char *arts[] = {artifact.c_str()};
  REQUIRE(br_write_manifest(dir.string().c_str(), "test", "{\"k\": 3}", arts, 1) == BR_OK);
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["command"] == "test");
  CHECK(j["config"]["k"] == 3);
  REQUIRE(j["artifacts"].size() == 1);
  CHECK(j["artifacts"][0]["path"] == "abc.txt");
  CHECK(j["artifacts"][0]["bytes"] == 3);
  CHECK(j["artifacts"][0]["sha256"] == std::string(hex));
  CHECK(br_write_manifest(dir.string().c_str(), "test", "{not json", arts, 1) == BR_ERR_PARSE);
}

} // TEST_SUITE capi
