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

#ifndef LSR_GRADCHECK_HPP_
#define LSR_GRADCHECK_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsr/core.hpp"

namespace lsr {

struct GradCheckReport {
  std::string loss_name;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  long instances = 0;
  long coordinates = 0;
  double tolerance = 1e-4;
  bool pass = true;
  // Coordinate with the largest error, within its instance.
  long worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

// |a - b| / max(|a|, |b|, 1e-8).
double RelativeError(double a, double b);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h against `analytic`
// on every coordinate. Throws if f returns a non-finite value.
GradCheckReport CheckGradient(const ScalarFunction& f, std::span<const double> analytic,
                              std::span<const double> point, double h, double tol,
                              std::string name = {});

// Combines per-instance reports of the same loss.
GradCheckReport MergeReports(std::span<const GradCheckReport> reports,
                             std::string name, double tol);

}  // namespace lsr

#endif  // LSR_GRADCHECK_HPP_
