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

#ifndef LSR_GRADSUITE_HPP_
#define LSR_GRADSUITE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lsr/gradcheck.hpp"

namespace lsr {

struct GradSuiteOptions {
  int instances = 100;
  double h = 1e-5;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  // Instances whose inputs sit closer than this to a kink of a piecewise
  // term are redrawn.
  double kink_margin = 1e-3;
};

// "ce", "clust", "perp", "norm", "em", "e2e".
const std::vector<std::string>& GradCheckNames();

// Runs `instances` random instances of one loss and merges the reports.
GradCheckReport RunGradCheck(const std::string& name, const GradSuiteOptions& opts);

// All of the above in GradCheckNames() order; "all" in the CLI.
std::vector<GradCheckReport> RunAllGradChecks(const GradSuiteOptions& opts);

}  // namespace lsr

#endif  // LSR_GRADSUITE_HPP_
