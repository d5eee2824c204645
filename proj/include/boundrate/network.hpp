// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boundrate/tensor.hpp"

namespace boundrate::nn {

enum class LayerKind { kDense, kConv1d, kGru, kRelu, kSelect, kFlatten, kMerge };

const char *layer_kind_name(LayerKind kind);

/// Declarative description of one layer. Networks are stacks of these;
/// `merge` runs each branch stack on the layer input and concatenates the
/// flattened branch outputs.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::size_t units = 0;  // dense outputs, conv filters, GRU hidden size
  std::size_t width = 0;  // conv kernel width
  std::size_t stride = 1; // conv stride
  bool return_sequences = false;
  std::vector<std::size_t> indices; // select: flat input positions
  Shape select_shape;               // select: output shape
  std::vector<std::vector<LayerSpec>> branches;

  /// Affine map of the flattened input; no activation (a linear output layer
  /// is a dense layer with nothing after it).
  static LayerSpec dense(std::size_t units);
  /// Valid (unpadded) convolution over [length, channels] -> [out_length, filters].
  static LayerSpec conv1d(std::size_t filters, std::size_t width, std::size_t stride = 1);
  /// Gated recurrent layer over [steps, features] with zero initial state.
  static LayerSpec gru(std::size_t units, bool return_sequences);
  static LayerSpec relu();
  static LayerSpec select(std::vector<std::size_t> indices, Shape shape);
  static LayerSpec flatten();
  static LayerSpec merge(std::vector<std::vector<LayerSpec>> branches);
};

struct NamedTensor {
  std::string name;
  Tensor value;
  bool trainable = true;

  bool operator==(const NamedTensor &) const = default;
};

/// Ordered, uniquely named parameter tensors.
class ParamSet {
public:
  std::size_t add(std::string name, Tensor value, bool trainable = true);

  std::size_t size() const noexcept { return tensors_.size(); }
  NamedTensor &operator[](std::size_t i) { return tensors_.at(i); }
  const NamedTensor &operator[](std::size_t i) const { return tensors_.at(i); }
  std::optional<std::size_t> find(std::string_view name) const;

  void set_trainable(bool trainable);
  /// Total number of scalars across tensors.
  std::size_t scalar_count() const;

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  bool operator==(const ParamSet &) const = default;

private:
  std::vector<NamedTensor> tensors_;
};

/// One tensor per parameter, same order and shapes.
using Gradients = std::vector<Tensor>;

struct Activations;

struct LayerCache {
  std::vector<Tensor> tensors;
  std::vector<Activations> branches;
};

/// Everything a forward pass produced; consumed by backward.
struct Activations {
  Tensor input;
  std::vector<Tensor> outputs;
  std::vector<LayerCache> caches;

  const Tensor &output() const { return outputs.empty() ? input : outputs.back(); }
};

/// Scalar loss of a network output; writes d loss / d output into `grad`.
using LossFn = std::function<double(const Tensor &output, Tensor &grad)>;

class Network {
public:
  Network() = default;
  /// Creates parameters for `layers` applied to inputs of `input_shape`.
  /// Weights are uniform in +-1/sqrt(fan_in) from `seed`; biases start at 0.
  /// Parameter names are prefixed with `name`.
  Network(std::string name, Shape input_shape, std::vector<LayerSpec> layers,
          std::uint64_t seed);

  const std::string &name() const noexcept { return name_; }
  const Shape &input_shape() const noexcept { return input_shape_; }
  const Shape &output_shape() const noexcept { return output_shape_; }
  const std::vector<LayerSpec> &layers() const noexcept { return layers_; }
  ParamSet &params() noexcept { return params_; }
  const ParamSet &params() const noexcept { return params_; }

  Activations forward(const Tensor &input) const;

  /// Accumulates parameter gradients into `grads` (frozen tensors are left
  /// untouched) and returns the gradient with respect to the input.
  Tensor backward(const Activations &acts, const Tensor &grad_output, Gradients &grads) const;

  Gradients zero_gradients() const;

  /// Rebuilds the parameter layout for `layers` and adopts `params` if every
  /// name and shape matches.
  static Network from_parts(std::string name, Shape input_shape, std::vector<LayerSpec> layers,
                            ParamSet params);

  struct Binding {
    Shape in;
    Shape out;
    std::vector<std::size_t> params;
    std::vector<std::vector<Binding>> branches;
  };

private:
  std::string name_;
  Shape input_shape_;
  Shape output_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Binding> bindings_;
  ParamSet params_;
};

/// Central-difference check of backward() against `loss` on `input`.
/// Returns the largest elementwise relative discrepancy over trainable
/// parameters, |a - n| / max(|a|, |n|, floor); 0 for a parameterless network.
double gradient_check(Network &network, const Tensor &input, const LossFn &loss, double epsilon,
                      double floor = 1e-6);

/// Shared finite-difference core: perturbs every element of each tensor in
/// `params` by +-epsilon, evaluates `objective`, and compares with `analytic`.
double finite_difference_error(std::vector<Tensor *> params, const std::vector<Tensor> &analytic,
                               const std::function<double()> &objective, double epsilon,
                               double floor = 1e-6);

/// theta -= learning_rate * grad for trainable tensors.
void sgd_step(ParamSet &params, const Gradients &grads, double learning_rate);

} // namespace boundrate::nn
