// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace boundrate::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape &shape);
std::string shape_string(const Shape &shape);

/// Dense row-major float64 array.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);
  static Tensor vector(std::initializer_list<double> values);

  const Shape &shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  double *data() noexcept { return data_.data(); }
  const double *data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double &operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double &at(std::size_t row, std::size_t col) { return data_[row * shape_.at(1) + col]; }
  double at(std::size_t row, std::size_t col) const { return data_[row * shape_.at(1) + col]; }

  void fill(double value);
  /// Same data, new shape of equal size.
  void reshape(Shape shape);
  bool all_finite() const noexcept;

  bool operator==(const Tensor &) const = default;

private:
  Shape shape_;
  std::vector<double> data_;
};

} // namespace boundrate::nn
