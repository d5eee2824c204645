// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include "boundrate/network.hpp"

namespace boundrate::nn::detail {

// Kernels. `grad_*` outputs are accumulated (+=) except grad_in, which is
// overwritten. Null parameter-gradient pointers mean the tensor is frozen.

void dense_forward(const Tensor &w, const Tensor &b, const Tensor &in, Tensor &out);
void dense_backward(const Tensor &w, const Tensor &in, const Tensor &grad_out, Tensor *grad_w,
                    Tensor *grad_b, Tensor &grad_in);

void conv1d_forward(const Tensor &w, const Tensor &b, std::size_t stride, const Tensor &in,
                    Tensor &out);
void conv1d_backward(const Tensor &w, std::size_t stride, const Tensor &in,
                     const Tensor &grad_out, Tensor *grad_w, Tensor *grad_b, Tensor &grad_in);

// GRU parameter order: w_x [3H, F], w_h [3H, H], b_x [3H], b_h [3H]; gate
// blocks are (reset, update, candidate).
void gru_forward(const Tensor &w_x, const Tensor &w_h, const Tensor &b_x, const Tensor &b_h,
                 bool return_sequences, const Tensor &in, Tensor &out, LayerCache &cache);
void gru_backward(const Tensor &w_x, const Tensor &w_h, bool return_sequences, const Tensor &in,
                  const LayerCache &cache, const Tensor &grad_out, Tensor *grad_w_x,
                  Tensor *grad_w_h, Tensor *grad_b_x, Tensor *grad_b_h, Tensor &grad_in);

} // namespace boundrate::nn::detail
