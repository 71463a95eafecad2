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

#ifndef LSR_DECIMATION_HPP_
#define LSR_DECIMATION_HPP_

#include <span>
#include <vector>

#include "lsr/core.hpp"

namespace lsr {

struct DecimationConfig {
  int window_h = 4;
  int window_w = 4;
  // A window keeps its peak class only if every other bin is strictly below
  // peak_ratio * peak.
  double peak_ratio = 0.5;
  // One positive multiplier per class, applied to raw pixel counts.
  Vec class_weights;

  void Validate(const ClassSet& classes) const;
};

// Inverse class frequency over the non-void pixels of a corpus, scaled so the
// largest weight is 1. Classes never seen get the largest observed weight.
Vec ClassFrequencyWeights(std::span<const LabelMap> corpus, const ClassSet& classes);

// Per-class non-void pixel counts of a corpus.
std::vector<long long> ClassPixelCounts(std::span<const LabelMap> corpus,
                                        const ClassSet& classes);

// Weighted-histogram downsampling of a full-resolution label map to one
// label per window. Mixed windows without a distinctive peak, and windows
// with no labelled pixel, become void.
LabelMap Decimate(const LabelMap& labels, const DecimationConfig& cfg,
                  const ClassSet& classes);

// Decision for a single window given its weighted bins; exposed for tests.
int DecideWindow(std::span<const double> bins, double peak_ratio, int void_id);

}  // namespace lsr

#endif  // LSR_DECIMATION_HPP_
