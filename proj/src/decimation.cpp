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

#include "lsr/decimation.hpp"

#include <algorithm>
#include <string>

namespace lsr {

void DecimationConfig::Validate(const ClassSet& classes) const {
  if (window_h <= 0 || window_w <= 0) throw Error("decimation window must be positive");
  if (!(peak_ratio > 0.0 && peak_ratio < 1.0)) {
    throw Error("peak ratio must lie in (0, 1)");
  }
  if (static_cast<int>(class_weights.size()) != classes.size()) {
    throw Error("expected " + std::to_string(classes.size()) + " class weights, got " +
                std::to_string(class_weights.size()));
  }
  for (double w : class_weights) {
    if (!(w > 0.0)) throw Error("class weights must be positive");
  }
}

std::vector<long long> ClassPixelCounts(std::span<const LabelMap> corpus,
                                        const ClassSet& classes) {
  std::vector<long long> counts(classes.size(), 0);
  for (const auto& map : corpus) {
    for (int id : map.data()) {
      if (classes.is_class(id)) ++counts[id];
    }
  }
  return counts;
}

Vec ClassFrequencyWeights(std::span<const LabelMap> corpus, const ClassSet& classes) {
  if (corpus.empty()) throw Error("class frequency weights need a non-empty corpus");
  const auto counts = ClassPixelCounts(corpus, classes);
  long long total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw Error("corpus contains no labelled pixels");

  Vec weights(classes.size(), 0.0);
  double peak = 0.0;
  for (int c = 0; c < classes.size(); ++c) {
    if (counts[c] > 0) {
      weights[c] = static_cast<double>(total) / static_cast<double>(counts[c]);
      peak = std::max(peak, weights[c]);
    }
  }
  for (int c = 0; c < classes.size(); ++c) {
    weights[c] = counts[c] > 0 ? weights[c] / peak : 1.0;
  }
  return weights;
}

int DecideWindow(std::span<const double> bins, double peak_ratio, int void_id) {
  int best = -1;
  double peak = 0.0;
  for (std::size_t c = 0; c < bins.size(); ++c) {
    if (bins[c] > peak) {
      peak = bins[c];
      best = static_cast<int>(c);
    }
  }
  if (best < 0) return void_id;
  const double bar = peak_ratio * peak;
  for (std::size_t c = 0; c < bins.size(); ++c) {
    if (static_cast<int>(c) != best && !(bins[c] < bar)) return void_id;
  }
  return best;
}

LabelMap Decimate(const LabelMap& labels, const DecimationConfig& cfg,
                  const ClassSet& classes) {
  cfg.Validate(classes);
  if (labels.height() % cfg.window_h != 0 || labels.width() % cfg.window_w != 0) {
    throw Error("label map " + std::to_string(labels.height()) + "x" +
                std::to_string(labels.width()) + " is not divisible by window " +
                std::to_string(cfg.window_h) + "x" + std::to_string(cfg.window_w));
  }
  const int out_h = labels.height() / cfg.window_h;
  const int out_w = labels.width() / cfg.window_w;
  LabelMap out(out_h, out_w, classes.void_id(), classes.void_id());
  std::vector<int> counts(classes.size());
  Vec bins(classes.size());
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int dr = 0; dr < cfg.window_h; ++dr) {
        for (int dc = 0; dc < cfg.window_w; ++dc) {
          const int id = labels.at(r * cfg.window_h + dr, c * cfg.window_w + dc);
          if (classes.is_class(id)) ++counts[id];
        }
      }
      for (int k = 0; k < classes.size(); ++k) bins[k] = cfg.class_weights[k] * counts[k];
      out.at(r, c) = DecideWindow(bins, cfg.peak_ratio, classes.void_id());
    }
  }
  return out;
}

}  // namespace lsr
