// fairwake/losses.hpp

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

// Softmax / temperature softmax, cross-entropy, and the distillation
// objective: L = delta * CE(softmax(z_s), y)
//              + (1 - delta) * tau^2 * KL(p_teacher^tau || p_student^tau).

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "fairwake/common.hpp"

namespace fairwake {

/// Floor inside the cross-entropy log.
inline constexpr double kCrossEntropyFloor = 1e-12;

inline Eigen::VectorXd log_softmax(const Eigen::VectorXd& z) {
  const double zmax = z.maxCoeff();
  const Eigen::ArrayXd shifted = z.array() - zmax;
  const double lse = std::log(shifted.exp().sum());
  return (shifted - lse).matrix();
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  return log_softmax(z).array().exp().matrix();
}

/// p_i = exp(z_i / tau) / sum_j exp(z_j / tau), max-subtracted for stability.
inline Eigen::VectorXd temperature_softmax(const Eigen::VectorXd& z, double tau) {
  if (!(tau > 0.0))
    throw std::domain_error("temperature_softmax: tau must be positive");
  return softmax(z / tau);
}

/// -ln(p_y) with the probability floored at kCrossEntropyFloor. The input
/// must be a distribution: components >= 0, summing to 1 within 1e-6.
inline double cross_entropy(const Eigen::VectorXd& p, int y) {
  if (y < 0 || y >= p.size())
    throw std::domain_error("cross_entropy: class index out of range");
  if (p.minCoeff() < 0.0)
    throw std::domain_error("cross_entropy: negative probability");
  if (std::abs(p.sum() - 1.0) > 1e-6)
    throw std::domain_error("cross_entropy: probabilities do not sum to 1");
  return -std::log(std::max(p(y), kCrossEntropyFloor));
}

/// KL(p_t^tau || p_s^tau) computed in the log domain; exact zero when the
/// logits coincide.
inline double temperature_kl(const Eigen::VectorXd& teacher_z,
                             const Eigen::VectorXd& student_z, double tau) {
  if (teacher_z.size() != student_z.size())
    throw DimensionError("temperature_kl: logit sizes differ");
  const Eigen::VectorXd lp_t = log_softmax(teacher_z / tau);
  const Eigen::VectorXd lp_s = log_softmax(student_z / tau);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < lp_t.size(); ++i)
    kl += std::exp(lp_t(i)) * (lp_t(i) - lp_s(i));
  return kl;
}

inline void validate_kd_args(double delta, double tau) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::domain_error("kd_loss: delta must be in [0, 1]");
  if (!(tau > 0.0)) throw std::domain_error("kd_loss: tau must be positive");
}

inline double kd_loss(const Eigen::VectorXd& student_z,
                      const Eigen::VectorXd& teacher_z, int y, double delta,
                      double tau) {
  validate_kd_args(delta, tau);
  const double ce = cross_entropy(softmax(student_z), y);
  if (delta == 1.0) return ce;
  return delta * ce +
         (1.0 - delta) * tau * tau * temperature_kl(teacher_z, student_z, tau);
}

/// d kd_loss / d student_z =
///   delta * (softmax(z_s) - onehot(y)) + (1-delta) * tau * (p_s^tau - p_t^tau)
inline Eigen::VectorXd kd_loss_grad(const Eigen::VectorXd& student_z,
                                    const Eigen::VectorXd& teacher_z, int y,
                                    double delta, double tau) {
  validate_kd_args(delta, tau);
  if (y < 0 || y >= student_z.size())
    throw std::domain_error("kd_loss_grad: class index out of range");
  Eigen::VectorXd grad = delta * softmax(student_z);
  grad(y) -= delta;
  if (delta < 1.0)
    grad += (1.0 - delta) * tau *
            (temperature_softmax(student_z, tau) -
             temperature_softmax(teacher_z, tau));
  return grad;
}

/// d CE(softmax(z), y) / d z — the training gradient for the baseline loop.
inline Eigen::VectorXd cross_entropy_logits_grad(const Eigen::VectorXd& z, int y) {
  if (y < 0 || y >= z.size())
    throw std::domain_error("cross_entropy_logits_grad: class index out of range");
  Eigen::VectorXd grad = softmax(z);
  grad(y) -= 1.0;
  return grad;
}

}  // namespace fairwake
