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

#include <algorithm>
#include <map>

#include <gtest/gtest.h>

#include "lsr/decimation.hpp"
#include "lsr/rng.hpp"

namespace lsr {
namespace {

constexpr int kVoid = 255;

DecimationConfig Config(int window, Vec weights, double peak_ratio = 0.5) {
  DecimationConfig cfg;
  cfg.window_h = cfg.window_w = window;
  cfg.peak_ratio = peak_ratio;
  cfg.class_weights = std::move(weights);
  return cfg;
}

// Brute force: enumerate the window's pixels, tally weighted counts per
// class in a map, then apply the peak test literally.
int BruteForceWindow(const std::vector<int>& pixels, const Vec& weights, double peak_ratio) {
  std::map<int, double> hist;
  for (int p : pixels) {
    if (p == kVoid) continue;
    hist[p] += weights[p];
  }
  if (hist.empty()) return kVoid;
  int best = -1;
  double peak = -1.0;
  for (const auto& [c, v] : hist) {
    if (v > peak) {
      peak = v;
      best = c;
    }
  }
  for (const auto& [c, v] : hist) {
    if (c != best && !(v < peak_ratio * peak)) return kVoid;
  }
  return best;
}

TEST(ClassFrequencyWeights, InverseFrequencyNormalisedToMax) {
  std::vector<int> data(100, 0);
  std::fill(data.begin() + 90, data.end(), 1);
  const std::vector<LabelMap> corpus{LabelMap(10, 10, kVoid, data)};
  const Vec w = ClassFrequencyWeights(corpus, ClassSet::Numbered(2));
  EXPECT_NEAR(w[0], 1.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(w[1], 1.0);
}

TEST(ClassFrequencyWeights, UniformCountsGiveOnes) {
  const std::vector<LabelMap> corpus{LabelMap(2, 2, kVoid, std::vector<int>{0, 1, 2, kVoid})};
  for (double w : ClassFrequencyWeights(corpus, ClassSet::Numbered(3))) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(ClassFrequencyWeights, AbsentClassGetsMaxWeight) {
  const std::vector<LabelMap> corpus{LabelMap(1, 4, kVoid, std::vector<int>{0, 0, 0, 1})};
  const Vec w = ClassFrequencyWeights(corpus, ClassSet::Numbered(3));
  EXPECT_DOUBLE_EQ(w[2], *std::max_element(w.begin(), w.begin() + 2));
}

TEST(ClassFrequencyWeights, EmptyCorpusIsAnError) {
  EXPECT_THROW(ClassFrequencyWeights({}, ClassSet::Numbered(2)), Error);
  const std::vector<LabelMap> all_void{LabelMap(2, 2, kVoid, kVoid)};
  EXPECT_THROW(ClassFrequencyWeights(all_void, ClassSet::Numbered(2)), Error);
}

TEST(Decimate, WeightedMinorityWins) {
  const LabelMap labels(2, 2, kVoid, std::vector<int>{0, 0, 0, 1});
  const LabelMap out = Decimate(labels, Config(2, {0.1, 1.0}), ClassSet::Numbered(2));
  EXPECT_EQ(out.at(0, 0), 1);
}

TEST(Decimate, PureWindowKeepsItsClass) {
  const LabelMap labels(2, 2, kVoid, 0);
  EXPECT_EQ(Decimate(labels, Config(2, {0.01, 1.0}), ClassSet::Numbered(2)).at(0, 0), 0);
}

TEST(Decimate, EvenSplitIsVoid) {
  const LabelMap labels(2, 2, kVoid, std::vector<int>{0, 0, 1, 1});
  EXPECT_EQ(Decimate(labels, Config(2, {1.0, 1.0}), ClassSet::Numbered(2)).at(0, 0), kVoid);
}

TEST(Decimate, AllVoidWindowIsVoid) {
  const LabelMap labels(2, 2, kVoid, kVoid);
  EXPECT_EQ(Decimate(labels, Config(2, {1.0, 1.0}), ClassSet::Numbered(2)).at(0, 0), kVoid);
}

TEST(Decimate, VoidPixelsDoNotVeto) {
  const LabelMap labels(2, 2, kVoid, std::vector<int>{1, kVoid, kVoid, kVoid});
  EXPECT_EQ(Decimate(labels, Config(2, {1.0, 1.0}), ClassSet::Numbered(2)).at(0, 0), 1);
}

TEST(Decimate, BoundaryAtExactlyHalfIsVoid) {
  // Bins (2, 1) with T_h = 0.5: 1 is not strictly below 1.
  const LabelMap labels(1, 3, kVoid, std::vector<int>{0, 0, 1});
  DecimationConfig cfg = Config(1, {1.0, 1.0});
  cfg.window_w = 3;
  EXPECT_EQ(Decimate(labels, cfg, ClassSet::Numbered(2)).at(0, 0), kVoid);
}

TEST(Decimate, IndivisibleDimensionsAreAnError) {
  const LabelMap labels(3, 4, kVoid, 0);
  EXPECT_THROW(Decimate(labels, Config(2, {1.0, 1.0}), ClassSet::Numbered(2)), Error);
}

TEST(Decimate, OutputShapeIsLatentResolution) {
  const LabelMap labels(8, 12, kVoid, 0);
  const LabelMap out = Decimate(labels, Config(4, {1.0}), ClassSet::Numbered(1));
  EXPECT_EQ(out.height(), 2);
  EXPECT_EQ(out.width(), 3);
}

TEST(DecimateProperty, MatchesBruteForceOnRandomWindows) {
  Rng rng(2024);
  const ClassSet classes = ClassSet::Numbered(4);
  int voids = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int window = 1 + static_cast<int>(rng.UniformInt(std::uint64_t{4}));
    Vec weights(4);
    for (double& w : weights) w = rng.Bernoulli(0.3) ? 1.0 : 0.05 + rng.Uniform();
    std::vector<int> pixels(window * window);
    for (int& p : pixels) {
      const auto k = rng.UniformInt(std::uint64_t{5});
      p = k == 4 ? kVoid : static_cast<int>(k);
    }
    const int got =
        Decimate(LabelMap(window, window, kVoid, pixels), Config(window, weights), classes)
            .at(0, 0);
    const int want = BruteForceWindow(pixels, weights, 0.5);
    ASSERT_EQ(got, want) << "trial " << trial;
    voids += got == kVoid;
  }
  EXPECT_GT(voids, 0);
}

TEST(DecimateProperty, EqualWeightsVoidIffSecondAtLeastHalfOfFirst) {
  Rng rng(77);
  const ClassSet classes = ClassSet::Numbered(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> pixels(16);
    std::vector<int> counts(3, 0);
    for (int& p : pixels) {
      p = static_cast<int>(rng.UniformInt(std::uint64_t{3}));
      ++counts[p];
    }
    std::sort(counts.rbegin(), counts.rend());
    const bool expect_void = 2 * counts[1] >= counts[0];
    const int got =
        Decimate(LabelMap(4, 4, kVoid, pixels), Config(4, {1, 1, 1}), classes).at(0, 0);
    EXPECT_EQ(got == kVoid, expect_void);
  }
}

TEST(DecideWindow, SingleBinAlwaysWins) {
  EXPECT_EQ(DecideWindow(std::vector<double>{0.0, 3.0, 0.0}, 0.5, kVoid), 1);
  EXPECT_EQ(DecideWindow(std::vector<double>{0.0, 0.0}, 0.5, kVoid), kVoid);
}

}  // namespace
}  // namespace lsr
