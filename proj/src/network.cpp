// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/network.hpp"

#include <algorithm>
#include <cmath>

#include "boundrate/error.hpp"
#include "boundrate/random.hpp"
#include "layers_internal.hpp"

namespace boundrate::nn {
namespace {

using Binding = Network::Binding;

std::string layer_label(const std::string &path, const LayerSpec &spec) {
  return path + " (" + layer_kind_name(spec.kind) + ")";
}

Tensor uniform_tensor(Shape shape, double limit, Rng &rng) {
  Tensor t(std::move(shape));
  for (auto &v : t.values())
    v = rng.uniform(-limit, limit);
  return t;
}

// Builds bindings (and, when `rng` is set, fresh parameters) for a layer stack.
// With `rng == nullptr` the parameters must already exist in `params` in
// creation order; `next_param` walks them.
std::vector<Binding> bind_stack(const std::vector<LayerSpec> &layers, Shape in,
                                const std::string &prefix, ParamSet &params, Rng *rng,
                                std::size_t &next_param) {
  std::vector<Binding> bindings;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto &spec = layers[i];
    const std::string path = prefix + "." + std::to_string(i);
    const std::string label = layer_label(path, spec);
    Binding b;
    b.in = in;

    auto param = [&](const std::string &suffix, Shape shape, double limit) {
      const std::string name = path + "." + layer_kind_name(spec.kind) + "." + suffix;
      if (rng) {
        b.params.push_back(params.add(name, limit > 0.0 ? uniform_tensor(shape, limit, *rng)
                                                        : Tensor(shape)));
        return;
      }
      if (next_param >= params.size())
        fail(ErrorCode::kShape, "missing parameter '" + name + "'");
      const auto &existing = params[next_param];
      if (existing.name != name || existing.value.shape() != shape)
        fail(ErrorCode::kShape, "parameter '" + existing.name + "' " +
                                    shape_string(existing.value.shape()) + " does not match '" +
                                    name + "' " + shape_string(shape));
      b.params.push_back(next_param++);
    };

    switch (spec.kind) {
    case LayerKind::kDense: {
      if (spec.units == 0)
        fail(ErrorCode::kInvalidArgument, label + ": units must be positive");
      const std::size_t fan_in = shape_size(in);
      param("w", {spec.units, fan_in}, 1.0 / std::sqrt(static_cast<double>(fan_in)));
      param("b", {spec.units}, 0.0);
      b.out = {spec.units};
      break;
    }
    case LayerKind::kConv1d: {
      if (in.size() != 2)
        fail(ErrorCode::kShape, label + ": expects [length, channels] input, got " +
                                    shape_string(in));
      if (spec.units == 0 || spec.width == 0 || spec.stride == 0)
        fail(ErrorCode::kInvalidArgument, label + ": filters, width and stride must be positive");
      if (spec.width > in[0])
        fail(ErrorCode::kShape, label + ": kernel width " + std::to_string(spec.width) +
                                    " exceeds input length " + std::to_string(in[0]));
      const std::size_t fan_in = spec.width * in[1];
      param("w", {spec.units, spec.width, in[1]}, 1.0 / std::sqrt(static_cast<double>(fan_in)));
      param("b", {spec.units}, 0.0);
      b.out = {(in[0] - spec.width) / spec.stride + 1, spec.units};
      break;
    }
    case LayerKind::kGru: {
      if (in.size() != 2)
        fail(ErrorCode::kShape, label + ": expects [steps, features] input, got " +
                                    shape_string(in));
      if (spec.units == 0)
        fail(ErrorCode::kInvalidArgument, label + ": units must be positive");
      const std::size_t h = spec.units;
      const double limit = 1.0 / std::sqrt(static_cast<double>(h));
      param("w_x", {3 * h, in[1]}, limit);
      param("w_h", {3 * h, h}, limit);
      param("b_x", {3 * h}, 0.0);
      param("b_h", {3 * h}, 0.0);
      b.out = spec.return_sequences ? Shape{in[0], h} : Shape{h};
      break;
    }
    case LayerKind::kRelu:
      b.out = in;
      break;
    case LayerKind::kSelect: {
      const std::size_t n = shape_size(in);
      for (auto idx : spec.indices)
        if (idx >= n)
          fail(ErrorCode::kShape, label + ": index " + std::to_string(idx) +
                                      " out of range for input " + shape_string(in));
      if (shape_size(spec.select_shape) != spec.indices.size() || spec.indices.empty())
        fail(ErrorCode::kShape, label + ": output shape " + shape_string(spec.select_shape) +
                                    " does not hold " + std::to_string(spec.indices.size()) +
                                    " indices");
      b.out = spec.select_shape;
      break;
    }
    case LayerKind::kFlatten:
      b.out = {shape_size(in)};
      break;
    case LayerKind::kMerge: {
      if (spec.branches.empty())
        fail(ErrorCode::kInvalidArgument, label + ": merge needs at least one branch");
      std::size_t total = 0;
      for (std::size_t j = 0; j < spec.branches.size(); ++j) {
        auto branch = bind_stack(spec.branches[j], in, path + ".merge." + std::to_string(j),
                                 params, rng, next_param);
        total += shape_size(branch.empty() ? in : branch.back().out);
        b.branches.push_back(std::move(branch));
      }
      b.out = {total};
      break;
    }
    }
    in = b.out;
    bindings.push_back(std::move(b));
  }
  return bindings;
}

Activations forward_stack(const std::vector<LayerSpec> &layers,
                          const std::vector<Binding> &bindings, const ParamSet &params,
                          const std::string &prefix, const Tensor &input) {
  Activations acts;
  acts.input = input;
  acts.outputs.resize(layers.size());
  acts.caches.resize(layers.size());
  const Tensor *current = &acts.input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto &spec = layers[i];
    const auto &b = bindings[i];
    if (current->shape() != b.in)
      fail(ErrorCode::kShape, layer_label(prefix + "." + std::to_string(i), spec) + ": expects " +
                                  shape_string(b.in) + ", got " +
                                  shape_string(current->shape()));
    Tensor &out = acts.outputs[i];
    auto &cache = acts.caches[i];
    auto p = [&](std::size_t j) -> const Tensor & { return params[b.params[j]].value; };
    switch (spec.kind) {
    case LayerKind::kDense:
      detail::dense_forward(p(0), p(1), *current, out);
      break;
    case LayerKind::kConv1d:
      detail::conv1d_forward(p(0), p(1), spec.stride, *current, out);
      break;
    case LayerKind::kGru:
      detail::gru_forward(p(0), p(1), p(2), p(3), spec.return_sequences, *current, out, cache);
      break;
    case LayerKind::kRelu:
      out = *current;
      for (auto &v : out.values())
        v = v > 0.0 ? v : 0.0;
      break;
    case LayerKind::kSelect: {
      out = Tensor(spec.select_shape);
      for (std::size_t j = 0; j < spec.indices.size(); ++j)
        out[j] = (*current)[spec.indices[j]];
      break;
    }
    case LayerKind::kFlatten:
      out = *current;
      out.reshape(b.out);
      break;
    case LayerKind::kMerge: {
      out = Tensor(b.out);
      std::size_t offset = 0;
      for (std::size_t j = 0; j < spec.branches.size(); ++j) {
        cache.branches.push_back(forward_stack(spec.branches[j], b.branches[j], params,
                                               prefix + "." + std::to_string(i) + ".merge." +
                                                   std::to_string(j),
                                               *current));
        const Tensor &branch_out = cache.branches.back().output();
        std::copy(branch_out.values().begin(), branch_out.values().end(),
                  out.values().begin() + static_cast<std::ptrdiff_t>(offset));
        offset += branch_out.size();
      }
      break;
    }
    }
    current = &out;
  }
  return acts;
}

Tensor backward_stack(const std::vector<LayerSpec> &layers, const std::vector<Binding> &bindings,
                      const ParamSet &params, const Activations &acts, const Tensor &grad_output,
                      Gradients &grads) {
  if (acts.outputs.size() != layers.size() || acts.caches.size() != layers.size())
    fail(ErrorCode::kShape, "stale activations: layer count differs from network");
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (acts.outputs[i].shape() != bindings[i].out)
      fail(ErrorCode::kShape, "stale activations at layer " + std::to_string(i));
  if (grad_output.shape() != acts.output().shape())
    fail(ErrorCode::kShape, "output gradient " + shape_string(grad_output.shape()) +
                                " does not match output " +
                                shape_string(acts.output().shape()));

  Tensor grad = grad_output;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto &spec = layers[i];
    const auto &b = bindings[i];
    const Tensor &in = i == 0 ? acts.input : acts.outputs[i - 1];
    auto p = [&](std::size_t j) -> const Tensor & { return params[b.params[j]].value; };
    auto g = [&](std::size_t j) -> Tensor * {
      const auto idx = b.params[j];
      return params[idx].trainable ? &grads[idx] : nullptr;
    };
    Tensor grad_in;
    switch (spec.kind) {
    case LayerKind::kDense:
      detail::dense_backward(p(0), in, grad, g(0), g(1), grad_in);
      break;
    case LayerKind::kConv1d:
      detail::conv1d_backward(p(0), spec.stride, in, grad, g(0), g(1), grad_in);
      break;
    case LayerKind::kGru:
      detail::gru_backward(p(0), p(1), spec.return_sequences, in, acts.caches[i], grad, g(0),
                           g(1), g(2), g(3), grad_in);
      break;
    case LayerKind::kRelu:
      grad_in = grad;
      for (std::size_t j = 0; j < grad_in.size(); ++j)
        if (!(in[j] > 0.0))
          grad_in[j] = 0.0;
      break;
    case LayerKind::kSelect:
      grad_in = Tensor(in.shape());
      for (std::size_t j = 0; j < spec.indices.size(); ++j)
        grad_in[spec.indices[j]] += grad[j];
      break;
    case LayerKind::kFlatten:
      grad_in = grad;
      grad_in.reshape(in.shape());
      break;
    case LayerKind::kMerge: {
      grad_in = Tensor(in.shape());
      std::size_t offset = 0;
      const auto &cache = acts.caches[i];
      if (cache.branches.size() != spec.branches.size())
        fail(ErrorCode::kShape, "stale activations: merge branch count differs");
      for (std::size_t j = 0; j < spec.branches.size(); ++j) {
        const Tensor &branch_out = cache.branches[j].output();
        Tensor branch_grad(branch_out.shape());
        std::copy_n(grad.values().begin() + static_cast<std::ptrdiff_t>(offset),
                    branch_out.size(), branch_grad.values().begin());
        offset += branch_out.size();
        const Tensor gi = backward_stack(spec.branches[j], b.branches[j], params,
                                         cache.branches[j], branch_grad, grads);
        for (std::size_t e = 0; e < gi.size(); ++e)
          grad_in[e] += gi[e];
      }
      break;
    }
    }
    grad = std::move(grad_in);
  }
  return grad;
}

} // namespace

const char *layer_kind_name(LayerKind kind) {
  switch (kind) {
  case LayerKind::kDense:
    return "dense";
  case LayerKind::kConv1d:
    return "conv1d";
  case LayerKind::kGru:
    return "gru";
  case LayerKind::kRelu:
    return "relu";
  case LayerKind::kSelect:
    return "select";
  case LayerKind::kFlatten:
    return "flatten";
  case LayerKind::kMerge:
    return "merge";
  }
  return "unknown";
}

LayerSpec LayerSpec::dense(std::size_t units) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::conv1d(std::size_t filters, std::size_t width, std::size_t stride) {
  LayerSpec s;
  s.kind = LayerKind::kConv1d;
  s.units = filters;
  s.width = width;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::gru(std::size_t units, bool return_sequences) {
  LayerSpec s;
  s.kind = LayerKind::kGru;
  s.units = units;
  s.return_sequences = return_sequences;
  return s;
}

LayerSpec LayerSpec::relu() {
  LayerSpec s;
  s.kind = LayerKind::kRelu;
  return s;
}

LayerSpec LayerSpec::select(std::vector<std::size_t> indices, Shape shape) {
  LayerSpec s;
  s.kind = LayerKind::kSelect;
  s.indices = std::move(indices);
  s.select_shape = std::move(shape);
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  return s;
}

LayerSpec LayerSpec::merge(std::vector<std::vector<LayerSpec>> branches) {
  LayerSpec s;
  s.kind = LayerKind::kMerge;
  s.branches = std::move(branches);
  return s;
}

std::size_t ParamSet::add(std::string name, Tensor value, bool trainable) {
  if (find(name))
    fail(ErrorCode::kInvalidArgument, "duplicate parameter name '" + name + "'");
  tensors_.push_back({std::move(name), std::move(value), trainable});
  return tensors_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].name == name)
      return i;
  return std::nullopt;
}

void ParamSet::set_trainable(bool trainable) {
  for (auto &t : tensors_)
    t.trainable = trainable;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto &t : tensors_)
    n += t.value.size();
  return n;
}

Network::Network(std::string name, Shape input_shape, std::vector<LayerSpec> layers,
                 std::uint64_t seed)
    : name_(std::move(name)), input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  Rng rng(seed);
  std::size_t next = 0;
  bindings_ = bind_stack(layers_, input_shape_, name_, params_, &rng, next);
  output_shape_ = bindings_.empty() ? input_shape_ : bindings_.back().out;
}

Network Network::from_parts(std::string name, Shape input_shape, std::vector<LayerSpec> layers,
                            ParamSet params) {
  Network net;
  net.name_ = std::move(name);
  net.input_shape_ = std::move(input_shape);
  net.layers_ = std::move(layers);
  net.params_ = std::move(params);
  std::size_t next = 0;
  net.bindings_ = bind_stack(net.layers_, net.input_shape_, net.name_, net.params_, nullptr, next);
  if (next != net.params_.size())
    fail(ErrorCode::kShape, "network '" + net.name_ + "' has " +
                                std::to_string(net.params_.size() - next) +
                                " unexpected parameter tensors");
  net.output_shape_ = net.bindings_.empty() ? net.input_shape_ : net.bindings_.back().out;
  return net;
}

Activations Network::forward(const Tensor &input) const {
  return forward_stack(layers_, bindings_, params_, name_, input);
}

Tensor Network::backward(const Activations &acts, const Tensor &grad_output,
                         Gradients &grads) const {
  if (grads.size() != params_.size())
    fail(ErrorCode::kShape, "gradient list does not match parameter count");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (grads[i].shape() != params_[i].value.shape())
      fail(ErrorCode::kShape, "gradient for '" + params_[i].name + "' has shape " +
                                  shape_string(grads[i].shape()));
  if (acts.input.shape() != input_shape_ || acts.outputs.size() != layers_.size() ||
      acts.caches.size() != layers_.size())
    fail(ErrorCode::kShape, name_ + ": activations come from a different network");
  if (grad_output.shape() != output_shape_)
    fail(ErrorCode::kShape, name_ + ": output gradient " + shape_string(grad_output.shape()) +
                                " does not match output " + shape_string(output_shape_));
  return backward_stack(layers_, bindings_, params_, acts, grad_output, grads);
}

Gradients Network::zero_gradients() const {
  Gradients grads;
  grads.reserve(params_.size());
  for (const auto &p : params_)
    grads.emplace_back(p.value.shape());
  return grads;
}

double finite_difference_error(std::vector<Tensor *> params, const std::vector<Tensor> &analytic,
                               const std::function<double()> &objective, double epsilon,
                               double floor) {
  if (!(epsilon > 0.0))
    fail(ErrorCode::kInvalidArgument, "finite-difference step must be positive");
  if (params.size() != analytic.size())
    fail(ErrorCode::kShape, "analytic gradient list does not match parameters");
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor &theta = *params[t];
    if (analytic[t].shape() != theta.shape())
      fail(ErrorCode::kShape, "analytic gradient shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + epsilon;
      const double plus = objective();
      theta[i] = saved - epsilon;
      const double minus = objective();
      theta[i] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

double gradient_check(Network &network, const Tensor &input, const LossFn &loss, double epsilon,
                      double floor) {
  auto grads = network.zero_gradients();
  const auto acts = network.forward(input);
  Tensor grad_out(acts.output().shape());
  loss(acts.output(), grad_out);
  network.backward(acts, grad_out, grads);

  std::vector<Tensor *> params;
  std::vector<Tensor> analytic;
  for (std::size_t i = 0; i < network.params().size(); ++i) {
    auto &p = network.params()[i];
    if (!p.trainable)
      continue;
    params.push_back(&p.value);
    analytic.push_back(grads[i]);
  }
  auto objective = [&] {
    const auto a = network.forward(input);
    Tensor scratch(a.output().shape());
    return loss(a.output(), scratch);
  };
  return finite_difference_error(std::move(params), analytic, objective, epsilon, floor);
}

void sgd_step(ParamSet &params, const Gradients &grads, double learning_rate) {
  if (!(learning_rate > 0.0))
    fail(ErrorCode::kInvalidArgument, "learning rate must be positive");
  if (grads.size() != params.size())
    fail(ErrorCode::kShape, "gradient list does not match parameter count");
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto &p = params[t];
    if (!p.trainable)
      continue;
    if (grads[t].shape() != p.value.shape())
      fail(ErrorCode::kShape, "gradient shape mismatch for '" + p.name + "'");
    auto values = p.value.values();
    const auto g = grads[t].values();
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] -= learning_rate * g[i];
  }
}

} // namespace boundrate::nn
