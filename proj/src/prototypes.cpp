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

#include "lsr/prototypes.hpp"

#include <string>

#include "lsr/io.hpp"

namespace lsr {

void FeatureSet::Add(std::span<const double> v, FeatureLocation where) {
  if (static_cast<int>(v.size()) != channels_) {
    throw Error("feature vector has " + std::to_string(v.size()) +
                " channels, set expects " + std::to_string(channels_));
  }
  values_.insert(values_.end(), v.begin(), v.end());
  where_.push_back(where);
}

ClassFeatureSets GatherClassFeatures(std::span<const FeatureMap> feats,
                                     std::span<const LabelMap> labels,
                                     const ClassSet& classes, Domain origin) {
  if (feats.size() != labels.size()) {
    throw Error("gather: " + std::to_string(feats.size()) + " feature maps but " +
                std::to_string(labels.size()) + " label maps");
  }
  const int k = feats.empty() ? 0 : feats.front().channels();
  ClassFeatureSets out;
  for (int c = 0; c < classes.size(); ++c) out.classes.emplace_back(c, origin, k);
  out.void_set = FeatureSet(classes.void_id(), origin, k);

  for (std::size_t n = 0; n < feats.size(); ++n) {
    const auto& f = feats[n];
    const auto& l = labels[n];
    if (f.height() != l.height() || f.width() != l.width()) {
      throw Error("gather: feature map " + std::to_string(f.height()) + "x" +
                  std::to_string(f.width()) + " paired with label map " +
                  std::to_string(l.height()) + "x" + std::to_string(l.width()));
    }
    if (f.channels() != k) throw Error("gather: feature maps disagree on channels");
    for (int r = 0; r < f.height(); ++r) {
      for (int c = 0; c < f.width(); ++c) {
        const int id = l.at(r, c);
        const FeatureLocation where{static_cast<int>(n), r, c};
        if (classes.is_class(id)) {
          out.classes[id].Add(f.at(r, c), where);
        } else {
          out.void_set.Add(f.at(r, c), where);
        }
      }
    }
  }
  return out;
}

FeatureSet PoolAllFeatures(std::span<const FeatureMap> feats, Domain origin) {
  const int k = feats.empty() ? 0 : feats.front().channels();
  FeatureSet out(-1, origin, k);
  for (std::size_t n = 0; n < feats.size(); ++n) {
    for (int r = 0; r < feats[n].height(); ++r) {
      for (int c = 0; c < feats[n].width(); ++c) {
        out.Add(feats[n].at(r, c), {static_cast<int>(n), r, c});
      }
    }
  }
  return out;
}

std::optional<Vec> BatchCentroid(const FeatureSet& set) {
  if (set.empty()) return std::nullopt;
  Vec mean(set.channels(), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto v = set.vector(i);
    for (int k = 0; k < set.channels(); ++k) mean[k] += v[k];
  }
  for (auto& m : mean) m /= static_cast<double>(set.size());
  return mean;
}

std::vector<std::optional<Vec>> BatchCentroids(const ClassFeatureSets& sets) {
  std::vector<std::optional<Vec>> out;
  out.reserve(sets.classes.size());
  for (const auto& s : sets.classes) out.push_back(BatchCentroid(s));
  return out;
}

PrototypeBank::PrototypeBank(int num_classes, int channels, double eta,
                             bool log_trajectory)
    : channels_(channels), eta_(eta), log_trajectory_(log_trajectory),
      prototypes_(num_classes, Vec(channels, 0.0)), initialized_(num_classes, false) {
  if (num_classes <= 0 || channels <= 0) throw Error("prototype bank needs positive sizes");
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error("smoothing factor must lie in [0, 1]");
}

int PrototypeBank::initialized_count() const {
  int n = 0;
  for (bool b : initialized_) n += b ? 1 : 0;
  return n;
}

PrototypeBank PrototypeBank::Updated(std::span<const std::optional<Vec>> centroids,
                                     long step) const {
  if (static_cast<int>(centroids.size()) != num_classes()) {
    throw Error("update: expected " + std::to_string(num_classes()) +
                " centroid slots, got " + std::to_string(centroids.size()));
  }
  PrototypeBank next = *this;
  for (int c = 0; c < num_classes(); ++c) {
    if (!centroids[c]) continue;
    const Vec& p = *centroids[c];
    if (static_cast<int>(p.size()) != channels_) {
      throw Error("update: centroid of class " + std::to_string(c) + " has wrong length");
    }
    Vec& proto = next.prototypes_[c];
    if (!initialized_[c]) {
      proto = p;
      next.initialized_[c] = true;
    } else {
      for (int k = 0; k < channels_; ++k) proto[k] = eta_ * proto[k] + (1.0 - eta_) * p[k];
    }
    if (log_trajectory_) next.trajectory_.push_back({step, c, proto});
  }
  return next;
}

void PrototypeBank::Set(int c, Vec prototype) {
  if (static_cast<int>(prototype.size()) != channels_) {
    throw Error("prototype has wrong length");
  }
  prototypes_.at(c) = std::move(prototype);
  initialized_.at(c) = true;
}

void PrototypeBank::WriteTrajectoryCsv(std::ostream& os) const {
  os << "step,class_id";
  for (int k = 0; k < channels_; ++k) os << ",f" << k;
  os << '\n';
  for (const auto& rec : trajectory_) {
    os << rec.step << ',' << rec.class_id;
    for (double v : rec.prototype) os << ',' << io::FormatReal(v);
    os << '\n';
  }
}

}  // namespace lsr
