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

#include "lsr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace lsr {

double RelativeError(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

GradCheckReport CheckGradient(const ScalarFunction& f, std::span<const double> analytic,
                              std::span<const double> point, double h, double tol,
                              std::string name) {
  if (!(h > 0.0)) throw Error("finite-difference step must be positive");
  if (analytic.size() != point.size()) {
    throw Error("analytic gradient has " + std::to_string(analytic.size()) +
                " entries for a point of dimension " + std::to_string(point.size()));
  }
  GradCheckReport report;
  report.loss_name = std::move(name);
  report.tolerance = tol;
  report.instances = 1;
  report.coordinates = static_cast<long>(point.size());

  Vec x(point.begin(), point.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error("non-finite loss while differencing coordinate " + std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * h);
    const double err = RelativeError(analytic[i], numeric);
    if (report.worst_index < 0 || err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_index = static_cast<long>(i);
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
    sum += err;
  }
  report.mean_rel_error = x.empty() ? 0.0 : sum / static_cast<double>(x.size());
  report.pass = report.max_rel_error <= tol;
  return report;
}

GradCheckReport MergeReports(std::span<const GradCheckReport> reports, std::string name,
                             double tol) {
  GradCheckReport out;
  out.loss_name = std::move(name);
  out.tolerance = tol;
  double weighted = 0.0;
  for (const auto& r : reports) {
    if (out.worst_index < 0 || r.max_rel_error > out.max_rel_error) {
      out.max_rel_error = r.max_rel_error;
      out.worst_index = r.worst_index;
      out.worst_analytic = r.worst_analytic;
      out.worst_numeric = r.worst_numeric;
    }
    weighted += r.mean_rel_error * static_cast<double>(r.coordinates);
    out.coordinates += r.coordinates;
    out.instances += r.instances;
  }
  out.mean_rel_error = out.coordinates > 0 ? weighted / out.coordinates : 0.0;
  out.pass = out.max_rel_error <= tol;
  return out;
}

}  // namespace lsr
