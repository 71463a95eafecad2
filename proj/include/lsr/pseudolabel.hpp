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

#ifndef LSR_PSEUDOLABEL_HPP_
#define LSR_PSEUDOLABEL_HPP_

#include <span>
#include <vector>

#include "lsr/core.hpp"
#include "lsr/prototypes.hpp"

namespace lsr {

struct PseudoLabelConfig {
  // A vector is assigned to class c only when its class-c score is strictly
  // above this value.
  double threshold = 0.5;

  void Validate(int num_classes) const;
};

// Softmax over classes of negative Euclidean distances to the prototypes.
// Uninitialized prototypes get probability 0 and are left out of the
// normalisation.
Vec SoftAssign(std::span<const double> feat, const PrototypeBank& prototypes);

struct TwoPassResult {
  std::vector<LabelMap> labels;
  // Per-batch target centres; classes with no confident vector fall back to
  // the source prototype.
  PrototypeBank target_centroids;
  // Highest pass-two score of every latent cell, including rejected ones.
  std::vector<std::vector<double>> confidence;
  double mean_confidence = 0.0;
  int voids = 0;
};

// First classifies target vectors against the source prototypes, recomputes
// class centres from the confidently assigned vectors, then relabels every
// vector against those centres. Unconfident vectors become void.
TwoPassResult TwoPassLabel(std::span<const FeatureMap> feats,
                           const PrototypeBank& source_bank, const ClassSet& classes,
                           const PseudoLabelConfig& cfg);

}  // namespace lsr

#endif  // LSR_PSEUDOLABEL_HPP_
