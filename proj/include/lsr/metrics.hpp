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

#ifndef LSR_METRICS_HPP_
#define LSR_METRICS_HPP_

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lsr/core.hpp"
#include "lsr/prototypes.hpp"

namespace lsr {

// Rows are ground truth, columns predictions. The extra last column counts
// pixels predicted as void (or any non-class id).
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 0);

  void Add(const LabelMap& pred, const LabelMap& gt);
  long long at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * (n_ + 1) + pred];
  }
  int num_classes() const { return n_; }

 private:
  int n_ = 0;
  std::vector<long long> counts_;
};

struct IoUResult {
  Vec iou;                   // 0 for absent classes
  std::vector<bool> present;  // false when TP + FP + FN == 0
  double miou = 0.0;          // over present classes
  double pixel_accuracy = 0.0;
};

IoUResult IoUFromConfusion(const ConfusionMatrix& cm);

// Per-class IoU of one prediction; void ground-truth pixels are ignored.
IoUResult ConfusionAndIoU(const LabelMap& pred, const LabelMap& gt,
                          const ClassSet& classes);

using MaybeValue = std::optional<double>;

// Converts an IoUResult to optional values (absent classes -> nullopt).
std::vector<MaybeValue> PresentIoU(const IoUResult& result);

struct ClassReport {
  std::vector<std::string> names;
  std::vector<MaybeValue> iou;
  std::vector<MaybeValue> iou_supervised;
  std::vector<MaybeValue> asr;  // adapted / supervised * 100
  MaybeValue miou;
  MaybeValue miou_restricted;
  MaybeValue masr;
  MaybeValue masr_restricted;
  std::vector<int> restricted;
  std::vector<std::string> warnings;
};

// Adapted-to-supervised ratios and their means. Classes whose supervised
// IoU is zero or missing are excluded with a warning; ratios are not
// clipped. `restrict_to` additionally produces aggregates over a subset.
ClassReport Masr(std::span<const MaybeValue> adapted, std::span<const MaybeValue> supervised,
                 std::optional<std::vector<int>> restrict_to = std::nullopt,
                 std::vector<std::string> names = {});

// One row per class plus aggregate rows; missing values are written as "-".
void WriteClassReportCsv(std::ostream& os, const ClassReport& report);

// Reads the `iou` column of a per-class CSV (rows with an integer class_id).
// "-" or an empty cell means the class has no value.
std::vector<MaybeValue> ReadIoUColumn(std::istream& is, std::vector<std::string>* names = nullptr);

struct PerClassStat {
  std::vector<MaybeValue> per_class;
  MaybeValue mean;  // over classes with a value
  std::vector<std::string> warnings;
};

// For every class, the mean angle in degrees to the other initialized
// prototypes. Zero prototypes are skipped with a warning.
PerClassStat MeanInterPrototypeAngle(const PrototypeBank& bank);

// Mean Shannon entropy (nats) of channel distributions f / sum(f) per class.
// All-zero vectors are skipped with a warning.
PerClassStat MeanChannelEntropy(std::span<const FeatureSet> sets);

}  // namespace lsr

#endif  // LSR_METRICS_HPP_
