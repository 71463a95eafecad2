/* Copyright 2026 The LSR Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "lsr/optim.hpp"

#include <cmath>
#include <string>

namespace lsr {

void OptimConfig::Validate() const {
  if (!(base_lr > 0.0)) throw Error("base learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("momentum must lie in [0, 1)");
  if (weight_decay < 0.0) throw Error("weight decay must be non-negative");
  if (!(poly_power > 0.0)) throw Error("poly power must be positive");
  if (total_steps <= 0) throw Error("total steps must be positive");
}

double PolyLearningRate(const OptimConfig& cfg, long step) {
  if (step < 0 || step >= cfg.total_steps) {
    throw Error("step " + std::to_string(step) + " outside schedule of " +
                std::to_string(cfg.total_steps) + " steps");
  }
  const double frac = 1.0 - static_cast<double>(step) / static_cast<double>(cfg.total_steps);
  return cfg.base_lr * std::pow(frac, cfg.poly_power);
}

void SgdMomentum::Step(Vec& params, std::span<const double> grads, const OptimConfig& cfg,
                       long step) {
  if (params.size() != grads.size()) throw Error("parameter/gradient size mismatch");
  if (velocity_.size() != params.size()) velocity_.assign(params.size(), 0.0);
  const double lr = PolyLearningRate(cfg, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = cfg.momentum * velocity_[i] + grads[i] + cfg.weight_decay * params[i];
    params[i] -= lr * velocity_[i];
  }
}

}  // namespace lsr
