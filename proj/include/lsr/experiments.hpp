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

#ifndef LSR_EXPERIMENTS_HPP_
#define LSR_EXPERIMENTS_HPP_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lsr/config.hpp"
#include "lsr/trainer.hpp"

namespace lsr {

// One trained network evaluated on the target validation split.
struct RunRow {
  std::uint64_t seed = 0;
  std::string variant;  // regime name or ablation variant
  double miou = 0.0;
  double pixel_accuracy = 0.0;
  MaybeValue masr;
  long best_step = 0;
  Diagnostics diagnostics;
};

struct AblationVariant {
  std::string name;
  LossWeights weights;
};

// "full" followed by one variant per removed term: no_c, no_p, no_n, no_em.
std::vector<AblationVariant> AblationVariants(const LossWeights& full);

struct VariantSummary {
  std::string variant;
  int runs = 0;
  double mean_miou = 0.0;
  double std_miou = 0.0;  // sample standard deviation
  MaybeValue mean_masr;
  int angle_increased = 0;
  int entropy_decreased = 0;
  int gap_shrunk = 0;
};

struct ExperimentReport {
  std::vector<RunRow> rows;
  std::vector<VariantSummary> summary;

  const VariantSummary& Find(const std::string& variant) const;
};

// target_supervised, source_only and adapt per seed of cfg.seeds. mASR is
// measured against the same seed's target-supervised run.
ExperimentReport CompareRegimes(const RunConfig& cfg);

// The comparison above plus every ablation variant.
ExperimentReport RunAblation(const RunConfig& cfg);

struct SweepRow {
  std::uint64_t seed = 0;
  PerturbationFamily family = PerturbationFamily::kGaussianNoise;
  int level = 0;
  double miou = 0.0;
  MaybeValue masr;
};

struct SweepPoint {
  PerturbationFamily family = PerturbationFamily::kGaussianNoise;
  int level = 0;
  double mean_miou = 0.0;
  MaybeValue mean_masr;
  double std_masr = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<SweepPoint> points;  // seed means, families then levels
};

// Per seed: trains the target-supervised reference on the clean benchmark,
// then adapts to every perturbed target and scores mASR on the perturbed
// target validation split.
SweepReport RunSweep(const RunConfig& cfg);

struct MonotoneCheck {
  int inversions = 0;
  double max_rise = 0.0;
};

// Counts consecutive rises in a sequence that should not increase.
MonotoneCheck CheckNonIncreasing(std::span<const double> values);

void WriteRunRowsCsv(std::ostream& os, std::span<const RunRow> rows);
void WriteSummaryCsv(std::ostream& os, std::span<const VariantSummary> summary);
void WriteSweepRowsCsv(std::ostream& os, std::span<const SweepRow> rows);
// One row per (family, level) with the mean mASR over seeds; the plot data.
void WriteSweepPointsCsv(std::ostream& os, std::span<const SweepPoint> points);

}  // namespace lsr

#endif  // LSR_EXPERIMENTS_HPP_
