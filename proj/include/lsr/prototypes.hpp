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

#ifndef LSR_PROTOTYPES_HPP_
#define LSR_PROTOTYPES_HPP_

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "lsr/core.hpp"

namespace lsr {

// Where a latent vector came from inside a batch.
struct FeatureLocation {
  int image = 0;
  int row = 0;
  int col = 0;
};

// Latent vectors that share a class label, stored as a dense row-major
// matrix with one row per vector. class_id is -1 for sets that pool every
// location regardless of label.
class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(int class_id, Domain origin, int channels)
      : class_id_(class_id), origin_(origin), channels_(channels) {}

  int class_id() const { return class_id_; }
  Domain origin() const { return origin_; }
  int channels() const { return channels_; }
  std::size_t size() const { return where_.size(); }
  bool empty() const { return where_.empty(); }

  std::span<const double> vector(std::size_t i) const {
    return {values_.data() + i * channels_, static_cast<std::size_t>(channels_)};
  }
  std::span<double> vector(std::size_t i) {
    return {values_.data() + i * channels_, static_cast<std::size_t>(channels_)};
  }
  const FeatureLocation& location(std::size_t i) const { return where_[i]; }
  std::span<const double> values() const { return values_; }

  void Add(std::span<const double> v, FeatureLocation where);

 private:
  int class_id_ = -1;
  Domain origin_ = Domain::kSource;
  int channels_ = 0;
  std::vector<double> values_;
  std::vector<FeatureLocation> where_;
};

struct ClassFeatureSets {
  std::vector<FeatureSet> classes;  // index == class id
  FeatureSet void_set;
};

// Splits every latent vector of a batch by its latent label.
ClassFeatureSets GatherClassFeatures(std::span<const FeatureMap> feats,
                                     std::span<const LabelMap> labels,
                                     const ClassSet& classes, Domain origin);

// Every latent vector of a batch, labels ignored.
FeatureSet PoolAllFeatures(std::span<const FeatureMap> feats, Domain origin);

// Channel-wise mean; nullopt when the class is absent from the batch.
std::optional<Vec> BatchCentroid(const FeatureSet& set);

std::vector<std::optional<Vec>> BatchCentroids(const ClassFeatureSets& sets);

struct PrototypeRecord {
  long step = 0;
  int class_id = 0;
  Vec prototype;
};

// Exponentially smoothed per-class prototypes. A class's first observation
// copies its centroid instead of blending with the zero initialisation.
class PrototypeBank {
 public:
  PrototypeBank() = default;
  PrototypeBank(int num_classes, int channels, double eta = 0.8,
                bool log_trajectory = false);

  int num_classes() const { return static_cast<int>(prototypes_.size()); }
  int channels() const { return channels_; }
  double eta() const { return eta_; }
  bool initialized(int c) const { return initialized_.at(c); }
  int initialized_count() const;
  const Vec& prototype(int c) const { return prototypes_.at(c); }
  const std::vector<PrototypeRecord>& trajectory() const { return trajectory_; }
  bool logs_trajectory() const { return log_trajectory_; }

  // p = eta * p_prev + (1 - eta) * centroid for present classes; absent
  // classes keep their estimate.
  PrototypeBank Updated(std::span<const std::optional<Vec>> centroids, long step) const;

  // Overrides one prototype; used for target-side banks rebuilt per batch.
  void Set(int c, Vec prototype);

  void WriteTrajectoryCsv(std::ostream& os) const;

 private:
  int channels_ = 0;
  double eta_ = 0.8;
  bool log_trajectory_ = false;
  std::vector<Vec> prototypes_;
  std::vector<bool> initialized_;
  std::vector<PrototypeRecord> trajectory_;
};

}  // namespace lsr

#endif  // LSR_PROTOTYPES_HPP_
