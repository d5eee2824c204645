// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

// Command-line front end. Talks to the library only through boundrate.h.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "boundrate/boundrate.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(br_status status, const std::string &what) {
  if (status == BR_OK)
    return;
  throw RuntimeError(what + ": " + br_status_name(status) + ": " + br_last_error());
}

template <typename T, void (*Free)(T *)> struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using Profile = std::unique_ptr<br_profile, Deleter<br_profile, br_profile_free>>;
using Dataset = std::unique_ptr<br_dataset, Deleter<br_dataset, br_dataset_free>>;
using Model = std::unique_ptr<br_model, Deleter<br_model, br_model_free>>;
using TrainReport = std::unique_ptr<br_train_report, Deleter<br_train_report, br_train_report_free>>;
using Session = std::unique_ptr<br_session, Deleter<br_session, br_session_free>>;
using Report = std::unique_ptr<br_report, Deleter<br_report, br_report_free>>;

std::string take_string(char *text) {
  std::string s = text ? text : "";
  br_string_free(text);
  return s;
}

// Options shared by several commands.
struct Options {
  std::string profile;
  std::vector<std::string> set;
  std::uint64_t seed = 1;
  std::uint64_t data_seed = 7;
  std::size_t sessions = 8;
  std::optional<double> duration_ms;
  std::string trace;
  double alpha = 1.2;
  double smoothing = 0.9;
  std::size_t k = 8;
  std::int64_t epochs = 100;
  double lr_pn = 0.0;
  double lr_een = 0.0;
  std::size_t batch = 1;
  std::string arch = "D";
  std::string resume;
  std::size_t seeds = 1;
  std::string controller = "bounded";
  std::vector<std::string> controllers;
  std::string model;
  std::vector<double> alphas{0.0, 0.6, 1.2, 1.8, 2.4};
  std::string out = "out";
};

Profile load_profile(const Options &o, const std::string &fallback = {}) {
  const std::string name = o.profile.empty() ? fallback : o.profile;
  if (name.empty())
    throw UsageError("--profile is required");
  br_profile *p = nullptr;
  if (br_profile_resolve(name.c_str(), &p) != BR_OK)
    throw UsageError("unknown profile '" + name + "': " + br_last_error());
  Profile profile(p);
  for (const auto &kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects key=value, got '" + kv + "'");
    if (br_profile_set(profile.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()) !=
        BR_OK)
      throw UsageError(std::string("--set ") + kv + ": " + br_last_error());
  }
  if (o.duration_ms) {
    const auto text = std::to_string(*o.duration_ms);
    if (br_profile_set(profile.get(), "duration_ms", text.c_str()) != BR_OK)
      throw UsageError(std::string("--duration: ") + br_last_error());
  }
  return profile;
}

br_window_config window_config(const Options &o) {
  auto c = br_window_config_default();
  c.history = o.k;
  c.alpha = o.alpha;
  c.smoothing = o.smoothing;
  return c;
}

br_train_config train_config(const Options &o, std::uint64_t seed) {
  auto c = br_train_config_default();
  c.epochs = o.epochs;
  if (o.lr_pn > 0.0)
    c.lr_pn = o.lr_pn;
  if (o.lr_een > 0.0)
    c.lr_een = o.lr_een;
  c.seed = seed;
  c.batch_size = o.batch;
  return c;
}

Dataset load_dataset(const Options &o) {
  const auto wc = window_config(o);
  br_dataset *d = nullptr;
  if (!o.trace.empty()) {
    check(br_dataset_from_trace(o.trace.c_str(), &wc, &d), "reading trace");
  } else {
    auto profile = load_profile(o, "train-sinusoid");
    check(br_dataset_from_profile(profile.get(), o.sessions, o.data_seed, &wc, &d),
          "building dataset");
  }
  return Dataset(d);
}

br_arch parse_arch(const std::string &text) {
  br_arch a{};
  if (br_arch_parse(text.c_str(), &a) != BR_OK)
    throw UsageError("unknown architecture '" + text + "' (expected A, B, C or D)");
  return a;
}

bool controller_needs_model(const std::string &controller) {
  int needs = 0;
  if (br_controller_check(controller.c_str(), &needs) != BR_OK)
    throw UsageError("unknown controller '" + controller + "': " + br_last_error());
  return needs != 0;
}

Model load_model(const std::string &path) {
  br_model *m = nullptr;
  check(br_model_load(path.c_str(), &m), "loading model '" + path + "'");
  return Model(m);
}

br_sim_config sim_config(const Options &o, double alpha) {
  auto c = br_sim_config_default();
  c.alpha = alpha;
  c.smoothing = o.smoothing;
  return c;
}

std::string prepare_out(const Options &o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec)
    throw RuntimeError("cannot create '" + o.out + "': " + ec.message());
  return o.out;
}

std::string join(const std::string &dir, const std::string &name) {
  return (fs::path(dir) / name).string();
}

std::ofstream open_out(const std::string &path) {
  std::ofstream f(path);
  if (!f)
    throw RuntimeError("cannot write '" + path + "'");
  f.precision(17);
  return f;
}

void manifest(const std::string &dir, const std::string &command, const json &config,
              const std::vector<std::string> &artifacts) {
  std::vector<std::string> paths;
  for (const auto &a : artifacts)
    paths.push_back(join(dir, a));
  std::vector<const char *> ptrs;
  for (const auto &p : paths)
    ptrs.push_back(p.c_str());
  const auto text = config.dump();
  check(br_write_manifest(dir.c_str(), command.c_str(), text.c_str(), ptrs.data(), ptrs.size()),
        "writing manifest");
}

json metrics_json(const br_session_metrics &m) {
  return {{"usi", m.usi},
          {"utilization", m.utilization},
          {"sigma_t", m.sigma_t},
          {"mean_latency", m.mean_latency},
          {"sigma_l", m.sigma_l},
          {"mean_bitrate", m.mean_bitrate},
          {"jitter", m.jitter},
          {"rtt", m.rtt}};
}

json dataset_config(const Options &o) {
  json j;
  if (!o.trace.empty()) {
    j["trace"] = o.trace;
  } else {
    j["profile"] = o.profile.empty() ? "train-sinusoid" : o.profile;
    j["set"] = o.set;
    j["sessions"] = o.sessions;
    j["data_seed"] = o.data_seed;
    if (o.duration_ms)
      j["duration_ms"] = *o.duration_ms;
  }
  j["k"] = o.k;
  j["alpha"] = o.alpha;
  return j;
}

json train_json(const br_train_config &c) {
  return {{"epochs", c.epochs},
          {"lr_pn", c.lr_pn},
          {"lr_een", c.lr_een},
          {"seed", c.seed},
          {"batch_size", c.batch_size}};
}

// ---- commands -------------------------------------------------------------

int cmd_synth(const Options &o) {
  auto profile = load_profile(o);
  const auto dir = prepare_out(o);
  const auto trace = join(dir, "trace.csv");
  const auto echo = join(dir, "profile.cfg");
  br_synth_stats stats{};
  const double duration = br_profile_duration_ms(profile.get());
  check(br_synth_trace(profile.get(), o.seed, duration, trace.c_str(), &stats), "synthesizing");
  char *text = nullptr;
  check(br_profile_serialize(profile.get(), &text), "serializing profile");
  open_out(echo) << take_string(text);
  std::cout << "packets sent " << stats.packets_sent << ", received " << stats.packets_received
            << ", random losses " << stats.random_losses << ", overflow drops "
            << stats.overflow_drops << "\n";
  json config = {{"profile", o.profile}, {"set", o.set}, {"seed", o.seed},
                 {"duration_ms", duration}};
  manifest(dir, "synth", config, {"trace.csv", "profile.cfg"});
  return 0;
}

int cmd_train(const Options &o) {
  auto dataset = load_dataset(o);
  Model model;
  if (!o.resume.empty()) {
    model = load_model(o.resume);
  } else {
    br_model *m = nullptr;
    check(br_model_create(parse_arch(o.arch), o.seed, o.k, &m), "building model");
    model.reset(m);
  }
  const auto config = train_config(o, o.seed);
  br_train_report *r = nullptr;
  check(br_model_train(model.get(), dataset.get(), &config, &r), "training");
  TrainReport report(r);

  const auto dir = prepare_out(o);
  const auto model_path = join(dir, "model.json");
  check(br_model_save(model.get(), model_path.c_str()), "saving model");
  {
    auto f = open_out(join(dir, "train_report.csv"));
    f << "epoch,loss_pred,loss_err\n";
    for (std::size_t i = 0; i < br_train_report_epochs(report.get()); ++i) {
      br_epoch_loss e{};
      check(br_train_report_epoch(report.get(), i, &e), "reading report");
      f << e.epoch << ',' << e.loss_pred << ',' << e.loss_err << '\n';
    }
  }
  const auto v = br_train_report_validation(report.get());
  {
    auto f = open_out(join(dir, "metrics.csv"));
    f << "arch,anpe,eer,cr\n"
      << br_arch_name(br_model_arch(model.get())) << ',' << v.anpe << ',' << v.eer << ','
      << v.cr << '\n';
  }
  std::cout << "arch " << br_arch_name(br_model_arch(model.get())) << ", epochs "
            << br_model_epochs_trained(model.get()) << ", train samples "
            << br_train_report_train_samples(report.get()) << ", validation samples "
            << br_train_report_validation_samples(report.get()) << "\n"
            << "validation anpe " << v.anpe << ", eer " << v.eer << ", cr " << v.cr << "\n";
  json cfg = {{"arch", br_arch_name(br_model_arch(model.get()))},
              {"dataset", dataset_config(o)},
              {"train", train_json(config)}};
  if (!o.resume.empty())
    cfg["resume"] = o.resume;
  manifest(dir, "train", cfg, {"model.json", "train_report.csv", "metrics.csv"});
  return 0;
}

int cmd_compare_arch(const Options &o) {
  if (o.seeds == 0)
    throw UsageError("--seeds must be at least 1");
  auto dataset = load_dataset(o);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < o.seeds; ++i)
    seeds.push_back(o.seed + i);
  const auto config = train_config(o, o.seed);
  br_metrics rows[4]{};
  check(br_compare_architectures(dataset.get(), seeds.data(), seeds.size(), &config, rows),
        "comparing architectures");
  const auto dir = prepare_out(o);
  auto f = open_out(join(dir, "compare_arch.csv"));
  f << "arch,parameters,anpe,eer,cr\n";
  for (int i = 0; i < 4; ++i) {
    const auto arch = static_cast<br_arch>(i);
    br_model *m = nullptr;
    check(br_model_create(arch, o.seed, o.k, &m), "building model");
    const Model model(m);
    f << br_arch_name(arch) << ',' << br_model_parameter_count(model.get()) << ','
      << rows[i].anpe << ',' << rows[i].eer << ',' << rows[i].cr << '\n';
    std::printf("%s  anpe %.4f  eer %.4f  cr %.4f\n", br_arch_name(arch), rows[i].anpe,
                rows[i].eer, rows[i].cr);
  }
  json cfg = {{"dataset", dataset_config(o)}, {"train", train_json(config)}, {"seeds", seeds}};
  manifest(dir, "compare-arch", cfg, {"compare_arch.csv"});
  return 0;
}

Model model_for(const Options &o, const std::string &controller) {
  if (!controller_needs_model(controller))
    return Model();
  if (o.model.empty())
    throw UsageError("controller '" + controller + "' needs --model");
  return load_model(o.model);
}

std::vector<br_session_metrics> run_seeds(const Options &o, const br_profile *profile,
                                          const std::string &controller, const br_model *model,
                                          double alpha) {
  const auto config = sim_config(o, alpha);
  std::vector<br_session_metrics> out;
  for (std::size_t i = 0; i < o.seeds; ++i) {
    br_session *s = nullptr;
    check(br_simulate(profile, controller.c_str(), model, o.seed + i, &config, &s), "simulating");
    const Session session(s);
    br_session_metrics m{};
    check(br_session_metrics_get(session.get(), &m), "scoring session");
    out.push_back(m);
  }
  return out;
}

br_session_metrics average(const std::vector<br_session_metrics> &items) {
  br_session_metrics m{};
  check(br_average_metrics(items.data(), items.size(), &m), "averaging");
  return m;
}

int cmd_simulate(const Options &o) {
  auto profile = load_profile(o);
  const auto model = model_for(o, o.controller);
  const auto config = sim_config(o, o.alpha);
  br_session *s = nullptr;
  check(br_simulate(profile.get(), o.controller.c_str(), model.get(), o.seed, &config, &s),
        "simulating");
  const Session session(s);
  const auto dir = prepare_out(o);
  check(br_session_write_csv(session.get(), join(dir, "session.csv").c_str()), "writing CSV");
  char *text = nullptr;
  check(br_session_summary_json(session.get(), &text), "summarizing");
  const auto summary = json::parse(take_string(text));
  br_session_metrics m{};
  check(br_session_metrics_get(session.get(), &m), "scoring session");
  json out = {{"summary", summary}, {"metrics", metrics_json(m)}};
  open_out(join(dir, "summary.json")) << out.dump(2) << '\n';
  std::printf("usi %.4f  utilization %.4f  bitrate %.1f kbps  latency %.1f ms  jitter %.4f ms\n",
              m.usi, m.utilization, m.mean_bitrate, m.mean_latency, m.jitter);
  json cfg = {{"profile", o.profile}, {"set", o.set},     {"controller", o.controller},
              {"seed", o.seed},       {"alpha", o.alpha}, {"smoothing", o.smoothing}};
  if (!o.model.empty())
    cfg["model"] = o.model;
  manifest(dir, "simulate", cfg, {"session.csv", "summary.json"});
  return 0;
}

int cmd_sweep_alpha(const Options &o) {
  if (o.seeds == 0)
    throw UsageError("--seeds must be at least 1");
  if (o.alphas.empty())
    throw UsageError("--alphas needs at least one value");
  auto alphas = o.alphas;
  std::sort(alphas.begin(), alphas.end());
  auto profile = load_profile(o);
  const auto model = model_for(o, o.controller);
  const auto dir = prepare_out(o);
  auto f = open_out(join(dir, "sweep_alpha.csv"));
  f << "alpha,usi,utilization,mean_bitrate_kbps,mean_latency_ms,sigma_t,sigma_l,jitter_ms\n";
  for (double a : alphas) {
    const auto m = average(run_seeds(o, profile.get(), o.controller, model.get(), a));
    f << a << ',' << m.usi << ',' << m.utilization << ',' << m.mean_bitrate << ','
      << m.mean_latency << ',' << m.sigma_t << ',' << m.sigma_l << ',' << m.jitter << '\n';
    std::printf("alpha %.2f  utilization %.4f  bitrate %.1f kbps  latency %.1f ms\n", a,
                m.utilization, m.mean_bitrate, m.mean_latency);
  }
  json cfg = {{"profile", o.profile}, {"set", o.set},       {"controller", o.controller},
              {"seed", o.seed},       {"seeds", o.seeds},   {"alphas", alphas},
              {"smoothing", o.smoothing}};
  if (!o.model.empty())
    cfg["model"] = o.model;
  manifest(dir, "sweep-alpha", cfg, {"sweep_alpha.csv"});
  return 0;
}

int cmd_compare_controllers(const Options &o) {
  if (o.seeds == 0)
    throw UsageError("--seeds must be at least 1");
  const std::vector<std::string> controllers =
      o.controllers.empty() ? std::vector<std::string>{"bounded", "no-range", "fixed-range:100",
                                                       "fixed-range:500"}
                            : o.controllers;
  if (controllers.size() < 2)
    throw UsageError("--controllers needs at least two entries");
  bool any_model = false;
  for (const auto &c : controllers)
    any_model = controller_needs_model(c) || any_model;
  if (any_model && o.model.empty())
    throw UsageError("model-based controllers need --model");
  auto profile = load_profile(o);
  const Model model = any_model ? load_model(o.model) : Model();

  br_report *r = nullptr;
  check(br_report_create(&r), "creating report");
  const Report report(r);
  for (const auto &c : controllers) {
    const auto m = average(run_seeds(o, profile.get(), c, model.get(), o.alpha));
    check(br_report_add(report.get(), c.c_str(), &m, o.profile.c_str(), c.c_str(), o.seed),
          "adding report row");
    std::printf("%-18s usi %.4f  utilization %.4f  bitrate %.1f kbps  jitter %.4f ms\n",
                c.c_str(), m.usi, m.utilization, m.mean_bitrate, m.jitter);
  }
  const auto dir = prepare_out(o);
  check(br_report_write(report.get(), join(dir, "report.csv").c_str(),
                        join(dir, "report.json").c_str()),
        "writing report");
  json cfg = {{"profile", o.profile}, {"set", o.set},     {"controllers", controllers},
              {"seed", o.seed},       {"seeds", o.seeds}, {"alpha", o.alpha}};
  if (!o.model.empty())
    cfg["model"] = o.model;
  manifest(dir, "compare-controllers", cfg, {"report.csv", "report.json"});
  return 0;
}

// ---- option wiring --------------------------------------------------------

void add_profile(CLI::App *c, Options &o, bool required) {
  auto *opt = c->add_option("--profile", o.profile, "built-in profile name or profile file");
  if (required)
    opt->required();
  c->add_option("--set", o.set, "profile override key=value (repeatable)");
  c->add_option("--duration", o.duration_ms, "session duration in ms")->check(CLI::NonNegativeNumber);
}

void add_dataset(CLI::App *c, Options &o) {
  c->add_option("--trace", o.trace, "packet trace CSV instead of a synthesized dataset")
      ->check(CLI::ExistingFile);
  c->add_option("--sessions", o.sessions, "synthesized sessions")->check(CLI::PositiveNumber);
  c->add_option("--data-seed", o.data_seed, "seed for dataset synthesis and split");
  c->add_option("--k", o.k, "history length in slots")->check(CLI::PositiveNumber);
  c->add_option("--alpha", o.alpha, "delay filter weight")->check(CLI::NonNegativeNumber);
}

void add_training(CLI::App *c, Options &o) {
  c->add_option("--epochs", o.epochs, "training epochs")->check(CLI::NonNegativeNumber);
  c->add_option("--lr-pn", o.lr_pn, "prediction-network learning rate")
      ->check(CLI::PositiveNumber);
  c->add_option("--lr-een", o.lr_een, "error-estimation learning rate")
      ->check(CLI::PositiveNumber);
  c->add_option("--batch", o.batch, "samples per gradient step")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"boundrate: delay-constrained rate control with a bounded neural estimator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(br_version()));
  Options o;

  auto *seed_help = "random seed";
  auto *out_help = "output directory";

  auto *synth = app.add_subcommand("synth", "write a synthetic packet trace");
  add_profile(synth, o, true);
  synth->add_option("--seed", o.seed, seed_help);
  synth->add_option("--out", o.out, out_help);

  auto *train = app.add_subcommand("train", "train a bounded estimator");
  add_profile(train, o, false);
  add_dataset(train, o);
  add_training(train, o);
  train->add_option("--arch", o.arch, "architecture A, B, C or D");
  train->add_option("--resume", o.resume, "continue from a checkpoint")->check(CLI::ExistingFile);
  train->add_option("--seed", o.seed, "initialization and shuffle seed");
  train->add_option("--out", o.out, out_help);

  auto *compare = app.add_subcommand("compare-arch", "train and score architectures A-D");
  add_profile(compare, o, false);
  add_dataset(compare, o);
  add_training(compare, o);
  compare->add_option("--seed", o.seed, "first training seed");
  compare->add_option("--seeds", o.seeds, "number of training seeds to average");
  compare->add_option("--out", o.out, out_help);

  auto *simulate = app.add_subcommand("simulate", "run one closed-loop session");
  add_profile(simulate, o, true);
  simulate->add_option("--controller", o.controller,
                       "bounded, no-range, fixed-range:<kbps>, aimd or constant:<kbps>");
  simulate->add_option("--model", o.model, "estimator checkpoint")->check(CLI::ExistingFile);
  simulate->add_option("--alpha", o.alpha, "delay filter weight")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", o.seed, seed_help);
  simulate->add_option("--out", o.out, out_help);

  auto *sweep = app.add_subcommand("sweep-alpha", "simulate across delay filter weights");
  add_profile(sweep, o, true);
  sweep->add_option("--controller", o.controller, "controller (default bounded)");
  sweep->add_option("--model", o.model, "estimator checkpoint")->check(CLI::ExistingFile);
  sweep->add_option("--alphas", o.alphas, "weights to sweep")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--seed", o.seed, "first seed");
  sweep->add_option("--seeds", o.seeds, "sessions per weight");
  sweep->add_option("--out", o.out, out_help);

  auto *controllers = app.add_subcommand("compare-controllers", "score controllers side by side");
  add_profile(controllers, o, true);
  controllers->add_option("--controllers", o.controllers, "controllers to compare")
      ->delimiter(',');
  controllers->add_option("--model", o.model, "estimator checkpoint")->check(CLI::ExistingFile);
  controllers->add_option("--alpha", o.alpha, "delay filter weight")
      ->check(CLI::NonNegativeNumber);
  controllers->add_option("--seed", o.seed, "first seed");
  controllers->add_option("--seeds", o.seeds, "sessions per controller");
  controllers->add_option("--out", o.out, out_help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed())
      return cmd_synth(o);
    if (train->parsed())
      return cmd_train(o);
    if (compare->parsed())
      return cmd_compare_arch(o);
    if (simulate->parsed())
      return cmd_simulate(o);
    if (sweep->parsed())
      return cmd_sweep_alpha(o);
    if (controllers->parsed())
      return cmd_compare_controllers(o);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
