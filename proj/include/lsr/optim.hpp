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

#ifndef LSR_OPTIM_HPP_
#define LSR_OPTIM_HPP_

#include <span>

#include "lsr/core.hpp"

namespace lsr {

struct OptimConfig {
  double base_lr = 2.5e-4;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double poly_power = 0.9;
  long total_steps = 5000;

  void Validate() const;
};

// base_lr * (1 - step / total_steps)^power.
double PolyLearningRate(const OptimConfig& cfg, long step);

// Heavy-ball SGD with L2 weight decay folded into the gradient:
//   v = momentum * v + grad + weight_decay * param;  param -= lr(step) * v.
class SgdMomentum {
 public:
  explicit SgdMomentum(std::size_t num_params = 0) : velocity_(num_params, 0.0) {}

  void Step(Vec& params, std::span<const double> grads, const OptimConfig& cfg, long step);
  const Vec& velocity() const { return velocity_; }

 private:
  Vec velocity_;
};

}  // namespace lsr

#endif  // LSR_OPTIM_HPP_
