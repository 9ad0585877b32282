// fairwake/optim.hpp

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

// Adam and SGD-with-momentum over the model's tensor list, plus the
// reduce-on-plateau learning-rate scheduler with its stop condition.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "fairwake/common.hpp"
#include "fairwake/gru.hpp"

namespace fairwake {

enum class OptimizerKind { kAdam, kSgdMomentum };

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum = 0.9;
  double weight_decay = 0.0;
};

inline OptimizerSpec adam_spec(double lr = 1e-3) {
  OptimizerSpec s;
  s.kind = OptimizerKind::kAdam;
  s.lr = lr;
  return s;
}

inline OptimizerSpec sgd_momentum_spec(double lr = 1e-4, double momentum = 0.9,
                                       double weight_decay = 1e-4) {
  OptimizerSpec s;
  s.kind = OptimizerKind::kSgdMomentum;
  s.lr = lr;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  return s;
}

/// Owns the per-parameter moment buffers and the step counter; advanced
/// sequentially by a single owner.
class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, const ModelParams& shape) : spec_(spec) {
    for (const auto& t : ModelParams::tensor_refs(shape)) {
      first_.emplace_back(Eigen::ArrayXd::Zero(t.size));
      second_.emplace_back(Eigen::ArrayXd::Zero(t.size));
    }
  }

  double lr() const { return spec_.lr; }
  void set_lr(double lr) { spec_.lr = lr; }
  std::int64_t step_count() const { return step_; }
  OptimizerKind kind() const { return spec_.kind; }

  void step(ModelParams& params, const ParamGrads& grads) {
    auto p_refs = ModelParams::tensor_refs(params);
    auto g_refs = ModelParams::tensor_refs(static_cast<const ModelParams&>(grads));
    ++step_;
    for (std::size_t k = 0; k < p_refs.size(); ++k) {
      if (p_refs[k].size != g_refs[k].size)
        throw DimensionError(std::string("optimizer: gradient shape mismatch on ") +
                             p_refs[k].name);
      Eigen::Map<Eigen::ArrayXd> theta(p_refs[k].data, p_refs[k].size);
      Eigen::Map<const Eigen::ArrayXd> grad(g_refs[k].data, g_refs[k].size);
      if (spec_.kind == OptimizerKind::kAdam)
        adam_update(k, theta, grad);
      else
        sgd_update(k, theta, grad);
    }
  }

 private:
  void adam_update(std::size_t k, Eigen::Map<Eigen::ArrayXd>& theta,
                   Eigen::Map<const Eigen::ArrayXd>& grad) {
    Eigen::ArrayXd g = grad;
    if (spec_.weight_decay != 0.0) g += spec_.weight_decay * theta;
    auto& m = first_[k];
    auto& v = second_[k];
    m = spec_.beta1 * m + (1.0 - spec_.beta1) * g;
    v = spec_.beta2 * v + (1.0 - spec_.beta2) * g.square();
    const double bc1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(step_));
    theta -= spec_.lr * (m / bc1) / ((v / bc2).sqrt() + spec_.eps);
  }

  /// v <- momentum * v + (g + weight_decay * theta); theta <- theta - lr * v
  void sgd_update(std::size_t k, Eigen::Map<Eigen::ArrayXd>& theta,
                  Eigen::Map<const Eigen::ArrayXd>& grad) {
    auto& v = first_[k];
    v = spec_.momentum * v + (grad + spec_.weight_decay * theta);
    theta -= spec_.lr * v;
  }

  OptimizerSpec spec_;
  std::int64_t step_ = 0;
  std::vector<Eigen::ArrayXd> first_;
  std::vector<Eigen::ArrayXd> second_;
};

struct PlateauConfig {
  double factor = 0.1;
  int patience = 10;
  double threshold = 1e-4;  // absolute improvement over the best loss
  int max_reductions = 4;
};

/// Reduce-on-plateau state machine. A plateau trigger divides the learning
/// rate by 10; the max_reductions-th successive trigger without an
/// intervening improvement raises the stop flag instead. Improvement resets
/// both the patience window and the reduction count.
class PlateauScheduler {
 public:
  struct Update {
    double lr;
    bool stop;
    bool reduced;
  };

  PlateauScheduler(double initial_lr, PlateauConfig cfg = {})
      : lr_(initial_lr), cfg_(cfg) {}

  double lr() const { return lr_; }
  int reductions() const { return reductions_; }

  Update observe(double validation_loss) {
    if (!std::isfinite(validation_loss))
      throw DataError("plateau scheduler: validation loss is not finite");
    Update u{lr_, false, false};
    if (!has_best_) {
      has_best_ = true;
      best_ = validation_loss;
      return u;
    }
    if (validation_loss < best_ - cfg_.threshold) {
      best_ = validation_loss;
      epochs_since_improvement_ = 0;
      reductions_ = 0;
      return u;
    }
    ++epochs_since_improvement_;
    if (epochs_since_improvement_ >= cfg_.patience) {
      epochs_since_improvement_ = 0;
      ++reductions_;
      if (reductions_ >= cfg_.max_reductions) {
        u.stop = true;
      } else {
        lr_ *= cfg_.factor;
        u.lr = lr_;
        u.reduced = true;
      }
    }
    return u;
  }

 private:
  double lr_;
  PlateauConfig cfg_;
  double best_ = 0.0;
  bool has_best_ = false;
  int epochs_since_improvement_ = 0;
  int reductions_ = 0;
};

}  // namespace fairwake
