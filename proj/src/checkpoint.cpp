// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "boundrate/error.hpp"
#include "boundrate/estimator.hpp"

namespace boundrate {
namespace {

using nlohmann::json;

constexpr const char *kFormat = "boundrate-model";
constexpr int kVersion = 1;

void append_tensors(json &out, const nn::ParamSet &params) {
  for (const auto &p : params) {
    json t;
    t["name"] = p.name;
    t["shape"] = p.value.shape();
    t["trainable"] = p.trainable;
    t["data"] = std::vector<double>(p.value.values().begin(), p.value.values().end());
    out.push_back(std::move(t));
  }
}

nn::Network adopt(const nn::Network &layout, const std::vector<nn::NamedTensor> &tensors) {
  nn::ParamSet params;
  const std::string prefix = layout.name() + ".";
  for (const auto &t : tensors)
    if (t.name.rfind(prefix, 0) == 0)
      params.add(t.name, t.value, t.trainable);
  return nn::Network::from_parts(layout.name(), layout.input_shape(), layout.layers(),
                                 std::move(params));
}

} // namespace

void save_model(std::ostream &out, const EstimatorModel &model) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["arch"] = arch_name(model.arch);
  doc["history"] = model.history;
  doc["normalization"] = {{"throughput_kbps", model.norm.throughput_kbps},
                          {"gradient_ms", model.norm.gradient_ms}};
  doc["epochs_trained"] = model.epochs_trained;
  json tensors = json::array();
  append_tensors(tensors, model.trunk.params());
  append_tensors(tensors, model.pn.params());
  append_tensors(tensors, model.een.params());
  doc["tensors"] = std::move(tensors);
  out << doc.dump(1) << '\n';
  if (!out)
    fail(ErrorCode::kIo, "failed to write model checkpoint");
}

void save_model(const std::string &path, const EstimatorModel &model) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  save_model(out, model);
}

EstimatorModel load_model(std::istream &in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception &e) {
    fail(ErrorCode::kParse, std::string("malformed model checkpoint: ") + e.what());
  }
  try {
    if (doc.at("format") != kFormat)
      fail(ErrorCode::kParse, "not a boundrate model checkpoint");
    if (doc.at("version").get<int>() != kVersion)
      fail(ErrorCode::kParse, "unsupported checkpoint version " + doc.at("version").dump());
    const auto arch = parse_arch(doc.at("arch").get<std::string>());
    if (!arch)
      fail(ErrorCode::kParse, "unknown architecture " + doc.at("arch").dump());
    auto model = build_architecture(*arch, 0, doc.at("history").get<std::size_t>());
    model.norm.throughput_kbps = doc.at("normalization").at("throughput_kbps").get<double>();
    model.norm.gradient_ms = doc.at("normalization").at("gradient_ms").get<double>();
    if (!(model.norm.throughput_kbps > 0.0) || !(model.norm.gradient_ms > 0.0))
      fail(ErrorCode::kParse, "normalization constants must be positive");
    model.epochs_trained = doc.at("epochs_trained").get<std::int64_t>();

    std::vector<nn::NamedTensor> tensors;
    for (const auto &t : doc.at("tensors")) {
      nn::Shape shape = t.at("shape").get<nn::Shape>();
      auto data = t.at("data").get<std::vector<double>>();
      if (data.size() != nn::shape_size(shape))
        fail(ErrorCode::kParse, "tensor '" + t.at("name").get<std::string>() +
                                    "' data does not match its shape");
      for (double v : data)
        if (!std::isfinite(v))
          fail(ErrorCode::kParse, "tensor '" + t.at("name").get<std::string>() +
                                      "' contains non-finite values");
      tensors.push_back({t.at("name").get<std::string>(),
                         nn::Tensor(std::move(shape), std::move(data)),
                         t.at("trainable").get<bool>()});
    }
    model.trunk = adopt(model.trunk, tensors);
    model.pn = adopt(model.pn, tensors);
    model.een = adopt(model.een, tensors);
    if (model.trunk.params().size() + model.pn.params().size() + model.een.params().size() !=
        tensors.size())
      fail(ErrorCode::kParse, "checkpoint holds tensors that belong to no network");
    return model;
  } catch (const json::exception &e) {
    fail(ErrorCode::kParse, std::string("malformed model checkpoint: ") + e.what());
  }
}

EstimatorModel load_model(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::kIo, "cannot open '" + path + "'");
  return load_model(in);
}

} // namespace boundrate
