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

#ifndef LSR_TRAINER_HPP_
#define LSR_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lsr/core.hpp"
#include "lsr/losses.hpp"
#include "lsr/metrics.hpp"
#include "lsr/network.hpp"
#include "lsr/optim.hpp"
#include "lsr/prototypes.hpp"
#include "lsr/pseudolabel.hpp"
#include "lsr/synth.hpp"

namespace lsr {

enum class Regime { kTargetSupervised, kSourceOnly, kAdapt };

// "target_supervised", "source_only", "adapt".
std::string RegimeName(Regime regime);
// Also accepts the short forms "target" and "source".
Regime ParseRegime(const std::string& name);

// Centre used by the clustering loss on target vectors.
enum class TargetCenter { kTargetCentroid, kSourcePrototype };

std::string TargetCenterName(TargetCenter center);
TargetCenter ParseTargetCenter(const std::string& name);

struct TrainConfig {
  NetShape net;
  OptimConfig optim;
  LossWeights weights;
  PseudoLabelConfig pseudo;
  double eta = 0.8;
  double peak_ratio = 0.5;
  TargetCenter target_center = TargetCenter::kTargetCentroid;
  bool weighted_ce = false;
  // Source-only steps before the adaptation losses switch on.
  long warmup_steps = 500;
  long eval_every = 500;
  // Target validation images used for the entropy and norm-gap diagnostics.
  int diag_images = 8;
  bool early_stopping = true;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Running state carried between adapt steps.
struct AdaptState {
  PrototypeBank bank;
  std::optional<double> norm_target;
};

// Everything the adaptation objective treats as a constant within one step.
struct DetachedInputs {
  PrototypeBank previous_bank;
  // previous_bank folded with this step's source centroids; the source
  // clustering centres.
  PrototypeBank clust_bank;
  std::vector<LabelMap> target_latent;
  std::vector<std::optional<Vec>> target_centers;
  std::optional<double> norm_target;
  double mean_confidence = 0.0;
};

struct AdaptObjective {
  LossBundle bundle;
  PrototypeBank smoothed_bank;
  double new_norm_target = 0.0;
};

DetachedInputs DetachStep(const ForwardCache& source, const LabelMap& source_latent,
                          const ForwardCache& target, const AdaptState& state,
                          const ClassSet& classes, const TrainConfig& cfg, long step);

// Loss values and output-space gradients of the full objective. Terms
// whose weight is zero are not evaluated.
AdaptObjective EvaluateAdaptObjective(const ForwardCache& source,
                                      const LabelMap& source_labels,
                                      const LabelMap& source_latent,
                                      const ForwardCache& target,
                                      const DetachedInputs& detached,
                                      const ClassSet& classes, const TrainConfig& cfg,
                                      std::span<const double> ce_weights, long step);

// Parameter gradient of a step given output-space gradients. `target` may be
// null when the step has no target image.
Vec BackwardStep(const TinySegNet& net, const ForwardCache& source, const ForwardCache* target,
                 const StepGradients& grads);

struct EvalPoint {
  long step = 0;
  double miou = 0.0;
  double pixel_accuracy = 0.0;
  MaybeValue masr;
  // Means over the training steps since the previous point.
  LossValues train;
  double source_val_ce = 0.0;
  double mean_confidence = 0.0;
  double stop_score = 0.0;
};

struct Diagnostics {
  MaybeValue angle_start;
  MaybeValue angle_end;
  MaybeValue entropy_start;
  MaybeValue entropy_end;
  MaybeValue gap_start;
  MaybeValue gap_end;
};

struct RunResult {
  Regime regime = Regime::kAdapt;
  TinySegNet final_net;
  TinySegNet best_net;
  long best_step = 0;
  std::vector<EvalPoint> history;
  Diagnostics diagnostics;
  // Selected network on the target validation split.
  IoUResult target_eval;
  MaybeValue target_masr;
  AdaptState final_state;
};

// `reference` holds target-supervised per-class IoUs for the mASR column.
RunResult RunRegime(Regime regime, const Benchmark& bench, const TrainConfig& cfg,
                    const std::vector<MaybeValue>* reference = nullptr);

IoUResult EvaluateNet(const TinySegNet& net, const Dataset& data, const ClassSet& classes);

// Mean unweighted cross-entropy over a labelled dataset.
double DatasetCrossEntropy(const TinySegNet& net, const Dataset& data, const ClassSet& classes);

// Mean filtered norm of every latent vector of the first `limit` images.
double MeanFilteredNorm(const TinySegNet& net, const Dataset& data, int limit);

// Mean channel entropy of latent vectors grouped by decimated ground truth.
MaybeValue LatentChannelEntropy(const TinySegNet& net, const Dataset& data,
                                const ClassSet& classes, int window, double peak_ratio,
                                int limit);

void WriteMetricsCsv(std::ostream& os, std::span<const EvalPoint> history);

struct Checkpoint {
  TinySegNet net;
  long step = 0;
  std::uint64_t seed = 0;
};

// "LSRCKPT", "window in_channels hidden features classes step seed", then
// one parameter per line.
void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace lsr

#endif  // LSR_TRAINER_HPP_
