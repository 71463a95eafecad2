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

#ifndef LSR_LOSSES_HPP_
#define LSR_LOSSES_HPP_

#include <optional>
#include <span>
#include <vector>

#include "lsr/core.hpp"
#include "lsr/prototypes.hpp"

namespace lsr {

struct LossWeights {
  double lambda_c = 0.1;
  double lambda_p = 0.5;
  double lambda_n = 0.025;
  double lambda_em = 0.1;
  // Regularisation added to the norm target.
  double delta_f = 0.1;

  void Validate() const;
};

// Gradient buffers of one optimisation step, shaped like the network
// outputs: h' x w' x K per feature map and H x W x |C| per logit map. An
// empty list stands for an all-zero gradient.
struct StepGradients {
  std::vector<Tensor> source_features;
  std::vector<Tensor> target_features;
  std::vector<Tensor> source_logits;
  std::vector<Tensor> target_logits;

  void AddScaled(const StepGradients& other, double scale);
};

struct LossTerm {
  double value = 0.0;
  StepGradients grads;
};

// Value and gradient with respect to the pre-softmax logits.
struct LogitLoss {
  double value = 0.0;
  Tensor grad_logits;
};

// Class-weighted mean cross-entropy over non-void pixels. `probs` is
// H x W x |C|.
LogitLoss WeightedCrossEntropy(const Tensor& probs, const LabelMap& labels,
                               std::span<const double> class_weights);

// Max-squares objective -(1 / 2N) sum_px sum_c p^2.
LogitLoss EntropyMinLoss(const Tensor& probs);

// Value plus one gradient block per input set, laid out like the set values.
struct SetLoss {
  double value = 0.0;
  std::vector<Vec> grads;
  int contributing_classes = 0;
};

// Mean over contributing classes of the mean per-channel L1 distance of each
// vector to its class centre. Centres are constants. A class contributes
// when its set is non-empty and its centre exists.
SetLoss ClusteringLoss(std::span<const FeatureSet> sets,
                       std::span<const std::optional<Vec>> centers);
SetLoss ClusteringLoss(std::span<const FeatureSet> sets, const PrototypeBank& bank);

struct PerpendicularityResult {
  double value = 0.0;
  // d value / d batch centroid; zero for classes absent from the batch.
  std::vector<Vec> centroid_grads;
  PrototypeBank smoothed;
  int classes = 0;
};

// Mean pairwise cosine of the smoothed prototypes obtained by folding the
// batch centroids into `previous`. Gradients reach the centroids through the
// smoothing update. Fewer than two initialized prototypes give zero.
PerpendicularityResult PerpendicularityLoss(const PrototypeBank& previous,
                                            std::span<const std::optional<Vec>> centroids,
                                            long step = 0);

// Zeroes channels below the vector's own channel mean.
struct FilteredVector {
  Vec values;
  std::vector<bool> kept;
};
FilteredVector NormFilter(std::span<const double> feat);

struct NormAlignmentResult {
  double value = 0.0;
  Vec source_grads;  // laid out like source.values()
  Vec target_grads;
  double new_norm_target = 0.0;
  int excluded = 0;
  bool skipped = false;
};

// Mean relative deviation |(target + delta_f) - ||phi(f)||| / target over
// every source and target vector, with phi the norm filter. Without a norm
// target the loss is skipped and only the next target is produced.
NormAlignmentResult NormAlignmentLoss(const FeatureSet& source, const FeatureSet& target,
                                      double delta_f, std::optional<double> norm_target);

// Helpers that place per-vector gradients into feature-map shaped buffers.
std::vector<Tensor> ZeroFeatureGrads(std::span<const FeatureMap> feats);
void ScatterSetGrads(std::span<const FeatureSet> sets, std::span<const Vec> grads,
                     std::vector<Tensor>& out);
// Spreads d/d centroid evenly over the members of each class set.
void ScatterCentroidGrads(std::span<const FeatureSet> sets,
                          std::span<const Vec> centroid_grads, std::vector<Tensor>& out);

struct LossValues {
  double ce = 0.0;
  double clust_source = 0.0;
  double clust_target = 0.0;
  double perp = 0.0;
  double norm = 0.0;
  double em = 0.0;
  double total = 0.0;

  double clust() const { return clust_source + clust_target; }
};

struct LossTerms {
  LossTerm ce;
  LossTerm clust_source;
  LossTerm clust_target;
  LossTerm perp;
  LossTerm norm;
  LossTerm em;
};

struct LossBundle {
  LossValues values;
  StepGradients grads;
};

// total = ce + lc (clust_s + clust_t) + lp perp + ln norm + lem em, with the
// gradients summed under the same weights.
LossBundle TotalLoss(const LossTerms& terms, const LossWeights& weights);

}  // namespace lsr

#endif  // LSR_LOSSES_HPP_
