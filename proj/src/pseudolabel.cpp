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

#include "lsr/pseudolabel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lsr {

void PseudoLabelConfig::Validate(int num_classes) const {
  if (!(threshold >= 1.0 / num_classes && threshold < 1.0)) {
    throw Error("pseudo-label threshold must lie in [1/|C|, 1)");
  }
}

Vec SoftAssign(std::span<const double> feat, const PrototypeBank& prototypes) {
  const int n = prototypes.num_classes();
  Vec neg_dist(n, -std::numeric_limits<double>::infinity());
  double peak = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < n; ++c) {
    if (!prototypes.initialized(c)) continue;
    neg_dist[c] = -Distance(feat, prototypes.prototype(c));
    peak = std::max(peak, neg_dist[c]);
  }
  if (!std::isfinite(peak)) throw Error("soft assignment needs an initialized prototype");
  Vec probs(n, 0.0);
  double z = 0.0;
  for (int c = 0; c < n; ++c) {
    if (!prototypes.initialized(c)) continue;
    probs[c] = std::exp(neg_dist[c] - peak);
    z += probs[c];
  }
  for (auto& p : probs) p /= z;
  return probs;
}

TwoPassResult TwoPassLabel(std::span<const FeatureMap> feats,
                           const PrototypeBank& source_bank, const ClassSet& classes,
                           const PseudoLabelConfig& cfg) {
  if (feats.empty()) throw Error("two-pass labelling needs a non-empty batch");
  if (source_bank.num_classes() != classes.size()) {
    throw Error("prototype bank has " + std::to_string(source_bank.num_classes()) +
                " classes, class set has " + std::to_string(classes.size()));
  }
  cfg.Validate(classes.size());
  const int n_classes = classes.size();
  const int k = source_bank.channels();

  // Pass 1: provisional sets against the source prototypes.
  std::vector<Vec> sums(n_classes, Vec(k, 0.0));
  std::vector<long> counts(n_classes, 0);
  for (const auto& f : feats) {
    if (f.channels() != k) throw Error("two-pass: feature channels differ from prototypes");
    for (int r = 0; r < f.height(); ++r) {
      for (int c = 0; c < f.width(); ++c) {
        const auto v = f.at(r, c);
        const Vec probs = SoftAssign(v, source_bank);
        for (int cls = 0; cls < n_classes; ++cls) {
          if (probs[cls] > cfg.threshold) {
            for (int i = 0; i < k; ++i) sums[cls][i] += v[i];
            ++counts[cls];
          }
        }
      }
    }
  }

  TwoPassResult out;
  out.target_centroids = PrototypeBank(n_classes, k, 1.0);
  for (int cls = 0; cls < n_classes; ++cls) {
    if (counts[cls] > 0) {
      Vec mean = sums[cls];
      for (auto& m : mean) m /= static_cast<double>(counts[cls]);
      out.target_centroids.Set(cls, std::move(mean));
    } else if (source_bank.initialized(cls)) {
      out.target_centroids.Set(cls, source_bank.prototype(cls));
    }
  }

  // Pass 2: final labels against the per-batch target centres.
  double conf_sum = 0.0;
  long cells = 0;
  for (const auto& f : feats) {
    LabelMap labels(f.height(), f.width(), classes.void_id(), classes.void_id());
    std::vector<double> conf(f.cells(), 0.0);
    for (int r = 0; r < f.height(); ++r) {
      for (int c = 0; c < f.width(); ++c) {
        const Vec probs = SoftAssign(f.at(r, c), out.target_centroids);
        int best = -1;
        double best_p = 0.0;
        for (int cls = 0; cls < n_classes; ++cls) {
          if (probs[cls] > best_p) {
            best_p = probs[cls];
            best = cls;
          }
        }
        conf[static_cast<std::size_t>(r) * f.width() + c] = best_p;
        conf_sum += best_p;
        ++cells;
        if (best >= 0 && best_p > cfg.threshold) {
          labels.at(r, c) = best;
        } else {
          ++out.voids;
        }
      }
    }
    out.labels.push_back(std::move(labels));
    out.confidence.push_back(std::move(conf));
  }
  out.mean_confidence = cells > 0 ? conf_sum / static_cast<double>(cells) : 0.0;
  return out;
}

}  // namespace lsr
