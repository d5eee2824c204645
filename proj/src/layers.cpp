// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "layers_internal.hpp"

#include <cmath>

namespace boundrate::nn::detail {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

void dense_forward(const Tensor &w, const Tensor &b, const Tensor &in, Tensor &out) {
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  out = Tensor({rows});
  const double *x = in.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double *wr = w.data() + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c)
      acc += wr[c] * x[c];
    out[r] = acc;
  }
}

void dense_backward(const Tensor &w, const Tensor &in, const Tensor &grad_out, Tensor *grad_w,
                    Tensor *grad_b, Tensor &grad_in) {
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  grad_in = Tensor(in.shape());
  double *gx = grad_in.data();
  const double *x = in.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = grad_out[r];
    if (g == 0.0)
      continue;
    const double *wr = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c)
      gx[c] += wr[c] * g;
    if (grad_w) {
      double *gw = grad_w->data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c)
        gw[c] += g * x[c];
    }
    if (grad_b)
      (*grad_b)[r] += g;
  }
}

void conv1d_forward(const Tensor &w, const Tensor &b, std::size_t stride, const Tensor &in,
                    Tensor &out) {
  const std::size_t filters = w.dim(0);
  const std::size_t width = w.dim(1);
  const std::size_t channels = w.dim(2);
  const std::size_t length = in.dim(0);
  const std::size_t out_len = (length - width) / stride + 1;
  out = Tensor({out_len, filters});
  for (std::size_t o = 0; o < out_len; ++o) {
    const double *x = in.data() + o * stride * channels; // window is contiguous
    for (std::size_t f = 0; f < filters; ++f) {
      const double *wf = w.data() + f * width * channels;
      double acc = b[f];
      for (std::size_t j = 0; j < width * channels; ++j)
        acc += wf[j] * x[j];
      out.at(o, f) = acc;
    }
  }
}

void conv1d_backward(const Tensor &w, std::size_t stride, const Tensor &in,
                     const Tensor &grad_out, Tensor *grad_w, Tensor *grad_b, Tensor &grad_in) {
  const std::size_t filters = w.dim(0);
  const std::size_t width = w.dim(1);
  const std::size_t channels = w.dim(2);
  const std::size_t out_len = grad_out.dim(0);
  grad_in = Tensor(in.shape());
  for (std::size_t o = 0; o < out_len; ++o) {
    const double *x = in.data() + o * stride * channels;
    double *gx = grad_in.data() + o * stride * channels;
    for (std::size_t f = 0; f < filters; ++f) {
      const double g = grad_out.at(o, f);
      if (g == 0.0)
        continue;
      const double *wf = w.data() + f * width * channels;
      for (std::size_t j = 0; j < width * channels; ++j)
        gx[j] += wf[j] * g;
      if (grad_w) {
        double *gw = grad_w->data() + f * width * channels;
        for (std::size_t j = 0; j < width * channels; ++j)
          gw[j] += g * x[j];
      }
      if (grad_b)
        (*grad_b)[f] += g;
    }
  }
}

// Cache layout: [0] h_prev [T,H], [1] r, [2] z, [3] n, [4] hidden-side candidate
// pre-activation (W_hn h + b_hn), each [T,H].
void gru_forward(const Tensor &w_x, const Tensor &w_h, const Tensor &b_x, const Tensor &b_h,
                 bool return_sequences, const Tensor &in, Tensor &out, LayerCache &cache) {
  const std::size_t steps = in.dim(0);
  const std::size_t features = in.dim(1);
  const std::size_t units = w_h.dim(1);
  cache.tensors.assign(5, Tensor({steps, units}));
  auto &h_prev = cache.tensors[0];
  auto &r_all = cache.tensors[1];
  auto &z_all = cache.tensors[2];
  auto &n_all = cache.tensors[3];
  auto &hn_all = cache.tensors[4];

  std::vector<double> h(units, 0.0);
  std::vector<double> gx(3 * units);
  std::vector<double> gh(3 * units);
  out = return_sequences ? Tensor({steps, units}) : Tensor({units});

  for (std::size_t t = 0; t < steps; ++t) {
    const double *x = in.data() + t * features;
    for (std::size_t i = 0; i < 3 * units; ++i) {
      const double *wx = w_x.data() + i * features;
      double ax = b_x[i];
      for (std::size_t c = 0; c < features; ++c)
        ax += wx[c] * x[c];
      gx[i] = ax;
      const double *wh = w_h.data() + i * units;
      double ah = b_h[i];
      for (std::size_t c = 0; c < units; ++c)
        ah += wh[c] * h[c];
      gh[i] = ah;
    }
    for (std::size_t u = 0; u < units; ++u) {
      const double r = sigmoid(gx[u] + gh[u]);
      const double z = sigmoid(gx[units + u] + gh[units + u]);
      const double hn = gh[2 * units + u];
      const double n = std::tanh(gx[2 * units + u] + r * hn);
      h_prev.at(t, u) = h[u];
      r_all.at(t, u) = r;
      z_all.at(t, u) = z;
      n_all.at(t, u) = n;
      hn_all.at(t, u) = hn;
    }
    for (std::size_t u = 0; u < units; ++u) {
      const double z = z_all.at(t, u);
      h[u] = (1.0 - z) * n_all.at(t, u) + z * h[u];
      if (return_sequences)
        out.at(t, u) = h[u];
    }
  }
  if (!return_sequences)
    for (std::size_t u = 0; u < units; ++u)
      out[u] = h[u];
}

void gru_backward(const Tensor &w_x, const Tensor &w_h, bool return_sequences, const Tensor &in,
                  const LayerCache &cache, const Tensor &grad_out, Tensor *grad_w_x,
                  Tensor *grad_w_h, Tensor *grad_b_x, Tensor *grad_b_h, Tensor &grad_in) {
  const std::size_t steps = in.dim(0);
  const std::size_t features = in.dim(1);
  const std::size_t units = w_h.dim(1);
  const auto &h_prev = cache.tensors[0];
  const auto &r_all = cache.tensors[1];
  const auto &z_all = cache.tensors[2];
  const auto &n_all = cache.tensors[3];
  const auto &hn_all = cache.tensors[4];

  grad_in = Tensor(in.shape());
  std::vector<double> dh(units, 0.0);
  if (!return_sequences)
    for (std::size_t u = 0; u < units; ++u)
      dh[u] = grad_out[u];
  std::vector<double> dgx(3 * units);
  std::vector<double> dgh(3 * units);
  std::vector<double> dh_next(units);

  for (std::size_t t = steps; t-- > 0;) {
    if (return_sequences)
      for (std::size_t u = 0; u < units; ++u)
        dh[u] += grad_out.at(t, u);
    for (std::size_t u = 0; u < units; ++u) {
      const double r = r_all.at(t, u);
      const double z = z_all.at(t, u);
      const double n = n_all.at(t, u);
      const double hp = h_prev.at(t, u);
      const double dn = dh[u] * (1.0 - z);
      const double dz = dh[u] * (hp - n);
      const double dan = dn * (1.0 - n * n);
      const double dr = dan * hn_all.at(t, u);
      const double dar = dr * r * (1.0 - r);
      const double daz = dz * z * (1.0 - z);
      dgx[u] = dar;
      dgx[units + u] = daz;
      dgx[2 * units + u] = dan;
      dgh[u] = dar;
      dgh[units + u] = daz;
      dgh[2 * units + u] = dan * r;
      dh_next[u] = dh[u] * z;
    }
    const double *x = in.data() + t * features;
    double *gx_in = grad_in.data() + t * features;
    for (std::size_t i = 0; i < 3 * units; ++i) {
      const double gxi = dgx[i];
      const double ghi = dgh[i];
      const double *wx = w_x.data() + i * features;
      for (std::size_t c = 0; c < features; ++c)
        gx_in[c] += wx[c] * gxi;
      const double *wh = w_h.data() + i * units;
      for (std::size_t c = 0; c < units; ++c)
        dh_next[c] += wh[c] * ghi;
      if (grad_w_x) {
        double *g = grad_w_x->data() + i * features;
        for (std::size_t c = 0; c < features; ++c)
          g[c] += gxi * x[c];
      }
      if (grad_w_h) {
        double *g = grad_w_h->data() + i * units;
        for (std::size_t c = 0; c < units; ++c)
          g[c] += ghi * h_prev.at(t, c);
      }
      if (grad_b_x)
        (*grad_b_x)[i] += gxi;
      if (grad_b_h)
        (*grad_b_h)[i] += ghi;
    }
    dh.swap(dh_next);
  }
}

} // namespace boundrate::nn::detail
