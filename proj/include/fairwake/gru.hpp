// fairwake/gru.hpp

// Copyright 2026  The Fairwake Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Single-layer GRU classifier with an exact analytic backward pass.
// Two-bias gate formulation, reset gate applied inside the hidden-side
// candidate term:
//   r_t = sigmoid(W_ir x_t + b_ir + W_hr h_{t-1} + b_hr)
//   z_t = sigmoid(W_iz x_t + b_iz + W_hz h_{t-1} + b_hz)
//   n_t = tanh(W_in x_t + b_in + r_t . (W_hn h_{t-1} + b_hn))
//   h_t = (1 - z_t) . n_t + z_t . h_{t-1}
// Logits come from an affine head on the final hidden state. Class order is
// fixed: 0 = unknown, 1 = wuw.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "fairwake/common.hpp"
#include "fairwake/dsp.hpp"
#include "fairwake/rng.hpp"

namespace fairwake {

struct ModelConfig {
  int input_size = kMfccCoeffs;
  int hidden_size = 200;
  int n_classes = 2;

  bool operator==(const ModelConfig&) const = default;
};

struct ModelParams {
  ModelConfig config;
  Eigen::MatrixXd w_ir, w_iz, w_in;  // hidden x input
  Eigen::MatrixXd w_hr, w_hz, w_hn;  // hidden x hidden
  Eigen::VectorXd b_ir, b_iz, b_in;
  Eigen::VectorXd b_hr, b_hz, b_hn;
  Eigen::MatrixXd w_head;  // classes x hidden
  Eigen::VectorXd b_head;

  static ModelParams zeros(const ModelConfig& cfg) {
    if (cfg.input_size < 1 || cfg.hidden_size < 1 || cfg.n_classes < 2)
      throw ConfigError("ModelConfig: sizes must be positive, >= 2 classes");
    ModelParams p;
    p.config = cfg;
    const int h = cfg.hidden_size;
    const int i = cfg.input_size;
    const int c = cfg.n_classes;
    p.w_ir = Eigen::MatrixXd::Zero(h, i);
    p.w_iz = Eigen::MatrixXd::Zero(h, i);
    p.w_in = Eigen::MatrixXd::Zero(h, i);
    p.w_hr = Eigen::MatrixXd::Zero(h, h);
    p.w_hz = Eigen::MatrixXd::Zero(h, h);
    p.w_hn = Eigen::MatrixXd::Zero(h, h);
    p.b_ir = Eigen::VectorXd::Zero(h);
    p.b_iz = Eigen::VectorXd::Zero(h);
    p.b_in = Eigen::VectorXd::Zero(h);
    p.b_hr = Eigen::VectorXd::Zero(h);
    p.b_hz = Eigen::VectorXd::Zero(h);
    p.b_hn = Eigen::VectorXd::Zero(h);
    p.w_head = Eigen::MatrixXd::Zero(c, h);
    p.b_head = Eigen::VectorXd::Zero(c);
    return p;
  }

  /// Weights uniform in +-1/sqrt(hidden); biases zero.
  static ModelParams random_init(const ModelConfig& cfg, Pcg32& rng) {
    ModelParams p = zeros(cfg);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_size));
    for (Eigen::MatrixXd* w :
         {&p.w_ir, &p.w_iz, &p.w_in, &p.w_hr, &p.w_hz, &p.w_hn, &p.w_head})
      for (Eigen::Index k = 0; k < w->size(); ++k)
        w->data()[k] = rng.uniform(-bound, bound);
    return p;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensor_refs(*this)) n += static_cast<std::size_t>(t.size);
    return n;
  }

  struct TensorRef {
    const char* name;
    double* data;
    Eigen::Index size;
  };
  struct ConstTensorRef {
    const char* name;
    const double* data;
    Eigen::Index size;
  };

  /// Fixed tensor order shared by the optimizer and the checkpoint format.
  static std::array<TensorRef, 14> tensor_refs(ModelParams& p) {
    return {{{"w_ir", p.w_ir.data(), p.w_ir.size()},
             {"w_iz", p.w_iz.data(), p.w_iz.size()},
             {"w_in", p.w_in.data(), p.w_in.size()},
             {"w_hr", p.w_hr.data(), p.w_hr.size()},
             {"w_hz", p.w_hz.data(), p.w_hz.size()},
             {"w_hn", p.w_hn.data(), p.w_hn.size()},
             {"b_ir", p.b_ir.data(), p.b_ir.size()},
             {"b_iz", p.b_iz.data(), p.b_iz.size()},
             {"b_in", p.b_in.data(), p.b_in.size()},
             {"b_hr", p.b_hr.data(), p.b_hr.size()},
             {"b_hz", p.b_hz.data(), p.b_hz.size()},
             {"b_hn", p.b_hn.data(), p.b_hn.size()},
             {"w_head", p.w_head.data(), p.w_head.size()},
             {"b_head", p.b_head.data(), p.b_head.size()}}};
  }
  static std::array<ConstTensorRef, 14> tensor_refs(const ModelParams& p) {
    return {{{"w_ir", p.w_ir.data(), p.w_ir.size()},
             {"w_iz", p.w_iz.data(), p.w_iz.size()},
             {"w_in", p.w_in.data(), p.w_in.size()},
             {"w_hr", p.w_hr.data(), p.w_hr.size()},
             {"w_hz", p.w_hz.data(), p.w_hz.size()},
             {"w_hn", p.w_hn.data(), p.w_hn.size()},
             {"b_ir", p.b_ir.data(), p.b_ir.size()},
             {"b_iz", p.b_iz.data(), p.b_iz.size()},
             {"b_in", p.b_in.data(), p.b_in.size()},
             {"b_hr", p.b_hr.data(), p.b_hr.size()},
             {"b_hz", p.b_hz.data(), p.b_hz.size()},
             {"b_hn", p.b_hn.data(), p.b_hn.size()},
             {"w_head", p.w_head.data(), p.w_head.size()},
             {"b_head", p.b_head.data(), p.b_head.size()}}};
  }
};

/// Gradients share the parameter layout.
using ParamGrads = ModelParams;

struct GruStepCache {
  Eigen::MatrixXd x;       // input x batch
  Eigen::MatrixXd h_prev;  // hidden x batch
  Eigen::MatrixXd r, z, n, s;
};

/// Per-step activations saved by the forward pass. Holds a non-owning pointer
/// to the parameters it was computed with; those must stay alive and
/// unmodified until the matching backward call.
struct ForwardCache {
  ModelConfig config;
  int batch = 0;
  std::vector<GruStepCache> steps;
  Eigen::MatrixXd h_final;
  const ModelParams* params = nullptr;
};

namespace detail {

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return ((-x.array()).exp() + 1.0).inverse().matrix();
}

}  // namespace detail

struct BatchForwardResult {
  Eigen::MatrixXd logits;  // classes x batch
  ForwardCache cache;
};

/// Batched forward pass over sequences of equal length. Each feature matrix
/// is T x input_size; the initial hidden state is zero.
inline BatchForwardResult gru_forward_batch(
    const ModelParams& p, const std::vector<const Eigen::MatrixXd*>& features) {
  const int batch = static_cast<int>(features.size());
  if (batch == 0) throw DimensionError("gru_forward: empty batch");
  const Eigen::Index t_steps = features[0]->rows();
  for (const auto* f : features) {
    if (f->cols() != p.config.input_size)
      throw DimensionError("gru_forward: feature dimension mismatch");
    if (f->rows() != t_steps || t_steps < 1)
      throw DimensionError("gru_forward: sequence lengths differ or are empty");
  }

  const int h = p.config.hidden_size;
  BatchForwardResult out;
  out.cache.config = p.config;
  out.cache.batch = batch;
  out.cache.params = &p;
  out.cache.steps.reserve(static_cast<std::size_t>(t_steps));

  Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd x_t(p.config.input_size, batch);
  for (Eigen::Index t = 0; t < t_steps; ++t) {
    for (int b = 0; b < batch; ++b)
      x_t.col(b) = features[static_cast<std::size_t>(b)]->row(t).transpose();

    GruStepCache step;
    step.x = x_t;
    step.h_prev = hidden;
    step.r = detail::sigmoid(((p.w_ir * x_t + p.w_hr * hidden).colwise() +
                              (p.b_ir + p.b_hr)));
    step.z = detail::sigmoid(((p.w_iz * x_t + p.w_hz * hidden).colwise() +
                              (p.b_iz + p.b_hz)));
    step.s = (p.w_hn * hidden).colwise() + p.b_hn;
    step.n = (((p.w_in * x_t).colwise() + p.b_in) + step.r.cwiseProduct(step.s))
                 .array()
                 .tanh()
                 .matrix();
    hidden = (1.0 - step.z.array()).matrix().cwiseProduct(step.n) +
             step.z.cwiseProduct(hidden);
    out.cache.steps.push_back(std::move(step));
  }
  out.cache.h_final = hidden;
  out.logits = (p.w_head * hidden).colwise() + p.b_head;
  return out;
}

/// Exact gradients of sum_b grad_logits(:,b) . logits(:,b) with respect to
/// every parameter, by backpropagation through time.
inline ParamGrads gru_backward_batch(const ForwardCache& cache,
                                     const Eigen::MatrixXd& grad_logits) {
  if (cache.params == nullptr)
    throw DimensionError("gru_backward: cache is not attached to parameters");
  const ModelParams& p = *cache.params;
  if (p.config != cache.config || cache.steps.empty())
    throw DimensionError("gru_backward: stale or mismatched forward cache");
  if (grad_logits.rows() != p.config.n_classes ||
      grad_logits.cols() != cache.batch)
    throw DimensionError("gru_backward: grad_logits shape mismatch");

  ParamGrads g = ModelParams::zeros(p.config);
  g.w_head = grad_logits * cache.h_final.transpose();
  g.b_head = grad_logits.rowwise().sum();

  Eigen::MatrixXd d_hidden = p.w_head.transpose() * grad_logits;
  for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
    const GruStepCache& s = *it;
    const Eigen::MatrixXd d_az = d_hidden.cwiseProduct(s.h_prev - s.n)
                                     .cwiseProduct(s.z)
                                     .cwiseProduct((1.0 - s.z.array()).matrix());
    const Eigen::MatrixXd d_an =
        d_hidden.cwiseProduct((1.0 - s.z.array()).matrix())
            .cwiseProduct((1.0 - s.n.array().square()).matrix());
    const Eigen::MatrixXd d_ar = d_an.cwiseProduct(s.s)
                                     .cwiseProduct(s.r)
                                     .cwiseProduct((1.0 - s.r.array()).matrix());
    const Eigen::MatrixXd d_s = d_an.cwiseProduct(s.r);

    g.w_in += d_an * s.x.transpose();
    g.w_ir += d_ar * s.x.transpose();
    g.w_iz += d_az * s.x.transpose();
    g.w_hn += d_s * s.h_prev.transpose();
    g.w_hr += d_ar * s.h_prev.transpose();
    g.w_hz += d_az * s.h_prev.transpose();
    g.b_in += d_an.rowwise().sum();
    g.b_ir += d_ar.rowwise().sum();
    g.b_iz += d_az.rowwise().sum();
    g.b_hn += d_s.rowwise().sum();
    g.b_hr += d_ar.rowwise().sum();
    g.b_hz += d_az.rowwise().sum();

    d_hidden = p.w_hr.transpose() * d_ar + p.w_hz.transpose() * d_az +
               p.w_hn.transpose() * d_s + d_hidden.cwiseProduct(s.z);
  }
  return g;
}

struct ForwardResult {
  Eigen::VectorXd logits;
  ForwardCache cache;
};

/// Single-sequence forward over an MFCC matrix (T x input_size).
inline ForwardResult gru_forward(const ModelParams& p, const MfccFrames& x) {
  auto batch = gru_forward_batch(p, {&x.coeffs});
  return {batch.logits.col(0), std::move(batch.cache)};
}

inline ParamGrads gru_backward(const ForwardCache& cache,
                               const Eigen::VectorXd& grad_logits) {
  return gru_backward_batch(cache, grad_logits);
}

}  // namespace fairwake
