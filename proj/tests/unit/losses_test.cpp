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
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lsr/gradcheck.hpp"
#include "lsr/losses.hpp"
#include "lsr/rng.hpp"

namespace lsr {
namespace {

constexpr int kVoid = 255;

FeatureSet MakeSet(int class_id, const std::vector<Vec>& vectors) {
  FeatureSet set(class_id, Domain::kSource, static_cast<int>(vectors.at(0).size()));
  for (const auto& v : vectors) set.Add(v, {});
  return set;
}

Tensor UniformProbs(std::size_t h, std::size_t w, std::size_t c) {
  return Tensor({h, w, c}, 1.0 / static_cast<double>(c));
}

TEST(WeightedCrossEntropy, PerfectPredictionIsZero) {
  Tensor probs({1, 2, 2}, {1, 0, 0, 1});
  const LabelMap labels(1, 2, kVoid, std::vector<int>{0, 1});
  EXPECT_EQ(WeightedCrossEntropy(probs, labels, Vec{1, 1}).value, 0.0);
}

TEST(WeightedCrossEntropy, UniformIsLogCRegardlessOfWeights) {
  const LabelMap labels(2, 2, kVoid, std::vector<int>{0, 1, 2, 3});
  for (const Vec& w : {Vec{1, 1, 1, 1}, Vec{0.1, 3, 7, 0.5}}) {
    EXPECT_NEAR(WeightedCrossEntropy(UniformProbs(2, 2, 4), labels, w).value, std::log(4.0),
                1e-15);
  }
}

TEST(WeightedCrossEntropy, HandWeightedMean) {
  Tensor probs({1, 2, 2}, {0.7, 0.3, 0.4, 0.6});
  const LabelMap labels(1, 2, kVoid, std::vector<int>{0, 1});
  const double a = -std::log(0.7), b = -std::log(0.6);
  EXPECT_NEAR(WeightedCrossEntropy(probs, labels, Vec{1, 3}).value, (a + 3 * b) / 4, 1e-15);
}

TEST(WeightedCrossEntropy, VoidPixelsIgnoredAndAllVoidIsAnError) {
  Tensor probs({1, 2, 2}, {0.7, 0.3, 0.4, 0.6});
  const LabelMap some_void(1, 2, kVoid, std::vector<int>{0, kVoid});
  EXPECT_NEAR(WeightedCrossEntropy(probs, some_void, Vec{1, 1}).value, -std::log(0.7), 1e-15);
  const LabelMap all_void(1, 2, kVoid, kVoid);
  EXPECT_THROW(WeightedCrossEntropy(probs, all_void, Vec{1, 1}), Error);
}

TEST(WeightedCrossEntropy, LogitGradientIsPMinusOneHot) {
  Tensor probs({1, 1, 3}, {0.2, 0.5, 0.3});
  const LabelMap labels(1, 1, kVoid, std::vector<int>{1});
  const LogitLoss l = WeightedCrossEntropy(probs, labels, Vec{1, 1, 1});
  EXPECT_NEAR(l.grad_logits[0], 0.2, 1e-15);
  EXPECT_NEAR(l.grad_logits[1], -0.5, 1e-15);
  EXPECT_NEAR(l.grad_logits[2], 0.3, 1e-15);
}

TEST(EntropyMinLoss, OneHotAndUniform) {
  EXPECT_DOUBLE_EQ(EntropyMinLoss(Tensor({1, 2, 2}, {1, 0, 0, 1})).value, -0.5);
  EXPECT_DOUBLE_EQ(EntropyMinLoss(UniformProbs(3, 2, 4)).value, -1.0 / 8.0);
}

TEST(EntropyMinLossProperty, BoundedOnTheSimplex) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t c = 2 + rng.UniformInt(std::uint64_t{5});
    Tensor logits({2, 3, c});
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = rng.Normal(0, 3);
    const double v = EntropyMinLoss(Softmax(logits, 2)).value;
    EXPECT_GE(v, -0.5 - 1e-15);
    EXPECT_LE(v, -1.0 / (2.0 * static_cast<double>(c)) + 1e-15);
  }
}

TEST(ClusteringLoss, ZeroAtPrototype) {
  const std::vector<FeatureSet> sets{MakeSet(0, {{1, 2}, {1, 2}})};
  const std::vector<std::optional<Vec>> centers{Vec{1, 2}};
  EXPECT_EQ(ClusteringLoss(sets, centers).value, 0.0);
}

TEST(ClusteringLoss, HandEvaluated) {
  const std::vector<FeatureSet> sets{MakeSet(0, {{1, 1}, {3, 1}})};
  const std::vector<std::optional<Vec>> centers{Vec{1, 1}};
  const SetLoss l = ClusteringLoss(sets, centers);
  EXPECT_DOUBLE_EQ(l.value, 0.5);
  EXPECT_EQ(l.contributing_classes, 1);
  // d/df of (1/K)|f - p| averaged over 2 vectors.
  EXPECT_DOUBLE_EQ(l.grads[0][2], 0.25);
}

TEST(ClusteringLoss, ZeroPaddingHalvesTheTerm) {
  const std::vector<FeatureSet> a{MakeSet(0, {{1, 3}})};
  const std::vector<FeatureSet> b{MakeSet(0, {{1, 3, 0, 0}})};
  const double va = ClusteringLoss(a, std::vector<std::optional<Vec>>{Vec{2, 2}}).value;
  const double vb = ClusteringLoss(b, std::vector<std::optional<Vec>>{Vec{2, 2, 0, 0}}).value;
  EXPECT_DOUBLE_EQ(vb, va / 2);
}

TEST(ClusteringLoss, NormalisesByContributingClasses) {
  const std::vector<FeatureSet> sets{MakeSet(0, {{2.0}}), MakeSet(1, {{0.0}}),
                                     FeatureSet(2, Domain::kSource, 1)};
  const std::vector<std::optional<Vec>> centers{Vec{1.0}, std::nullopt, Vec{5.0}};
  const SetLoss l = ClusteringLoss(sets, centers);
  EXPECT_EQ(l.contributing_classes, 1);
  EXPECT_DOUBLE_EQ(l.value, 1.0);
}

TEST(ClusteringLoss, NoContributingClassIsZero) {
  const std::vector<FeatureSet> sets{MakeSet(0, {{2.0}})};
  const SetLoss l = ClusteringLoss(sets, std::vector<std::optional<Vec>>{std::nullopt});
  EXPECT_EQ(l.value, 0.0);
  EXPECT_EQ(l.grads[0], Vec{0.0});
}

TEST(ClusteringLossProperty, PermutationInvariant) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec> a(5, Vec(3)), b(4, Vec(3));
    for (auto& v : a) {
      for (double& x : v) x = rng.Uniform();
    }
    for (auto& v : b) {
      for (double& x : v) x = rng.Uniform();
    }
    const Vec pa{0.5, 0.5, 0.5}, pb{0.2, 0.9, 0.1};
    const double base =
        ClusteringLoss(std::vector<FeatureSet>{MakeSet(0, a), MakeSet(1, b)},
                       std::vector<std::optional<Vec>>{pa, pb})
            .value;
    std::vector<Vec> a_shuffled(a.rbegin(), a.rend());
    std::rotate(b.begin(), b.begin() + 1, b.end());
    const double shuffled =
        ClusteringLoss(std::vector<FeatureSet>{MakeSet(0, b), MakeSet(1, a_shuffled)},
                       std::vector<std::optional<Vec>>{pb, pa})
            .value;
    EXPECT_NEAR(base, shuffled, 1e-14);
  }
}

std::vector<std::optional<Vec>> Centroids(std::initializer_list<Vec> vs) {
  std::vector<std::optional<Vec>> out;
  for (const auto& v : vs) out.emplace_back(v);
  return out;
}

TEST(PerpendicularityLoss, OrthonormalIsZero) {
  const auto r = PerpendicularityLoss(PrototypeBank(3, 3), Centroids({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.classes, 3);
}

TEST(PerpendicularityLoss, SameRayIsOne) {
  const auto r = PerpendicularityLoss(PrototypeBank(2, 2), Centroids({{1, 2}, {3, 6}}));
  EXPECT_NEAR(r.value, 1.0, 1e-15);
}

TEST(PerpendicularityLoss, SixtyDegreesIsHalf) {
  const auto r = PerpendicularityLoss(
      PrototypeBank(2, 2), Centroids({{1, 0}, {0.5, std::sqrt(3.0) / 2}}));
  EXPECT_NEAR(r.value, 0.5, 1e-15);
}

TEST(PerpendicularityLoss, FewerThanTwoPrototypesIsZero) {
  std::vector<std::optional<Vec>> c{Vec{1, 0}, std::nullopt};
  const auto r = PerpendicularityLoss(PrototypeBank(2, 2), c);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.classes, 1);
}

TEST(PerpendicularityLoss, ZeroPrototypeIsAnError) {
  EXPECT_THROW(PerpendicularityLoss(PrototypeBank(2, 2), Centroids({{1, 0}, {0, 0}})), Error);
}

TEST(PerpendicularityLoss, AbsentClassHasNoGradient) {
  PrototypeBank prev(3, 2, 0.8);
  prev = prev.Updated(Centroids({{1, 0.2}, {0.3, 1}, {1, 1}}), 0);
  std::vector<std::optional<Vec>> c{Vec{1, 0.1}, Vec{0.2, 1}, std::nullopt};
  const auto r = PerpendicularityLoss(prev, c, 1);
  EXPECT_EQ(r.centroid_grads[2], (Vec{0, 0}));
  EXPECT_NE(r.centroid_grads[0], (Vec{0, 0}));
}

TEST(PerpendicularityLossProperty, WithinUnitIntervalForNonNegative) {
  Rng rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::optional<Vec>> c;
    const int n = 2 + static_cast<int>(rng.UniformInt(std::uint64_t{4}));
    for (int i = 0; i < n; ++i) {
      Vec v(4);
      for (double& x : v) x = rng.Uniform();
      c.emplace_back(v);
    }
    const double v = PerpendicularityLoss(PrototypeBank(n, 4), c).value;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-15);
  }
}

TEST(PerpendicularityLoss, MatchesMeanCosineOverUnorderedPairs) {
  const Vec a{1, 0, 1}, b{0, 2, 1}, c{1, 1, 0};
  auto cosine = [](const Vec& x, const Vec& y) { return Dot(x, y) / (L2Norm(x) * L2Norm(y)); };
  const double want = (cosine(a, b) + cosine(a, c) + cosine(b, c)) / 3.0;
  EXPECT_NEAR(PerpendicularityLoss(PrototypeBank(3, 3), Centroids({a, b, c})).value, want, 1e-15);
}

TEST(NormFilter, ThresholdAtMean) {
  const FilteredVector f = NormFilter(Vec{4, 1, 1, 2});
  EXPECT_EQ(f.values, (Vec{4, 0, 0, 2}));
  EXPECT_EQ(f.kept, (std::vector<bool>{true, false, false, true}));
  EXPECT_EQ(NormFilter(Vec{3, 3, 3}).values, (Vec{3, 3, 3}));
  EXPECT_EQ(NormFilter(Vec{0, 0}).values, (Vec{0, 0}));
}

TEST(NormAlignmentLoss, ExactTargetIsZero) {
  // (4,4) keeps both channels and (0,5) only the second; every norm is 5.
  const double a = 5.0 / std::sqrt(2.0);
  const FeatureSet s = MakeSet(-1, {{a, a}, {0, 5}});
  const FeatureSet t = MakeSet(-1, {{5, 0}});
  EXPECT_NEAR(NormAlignmentLoss(s, t, 0.5, 4.5).value, 0.0, 1e-15);
}

TEST(NormAlignmentLoss, SingleVector) {
  const FeatureSet s = MakeSet(-1, {{1.0}});
  const FeatureSet t(-1, Domain::kTarget, 1);
  const NormAlignmentResult r = NormAlignmentLoss(s, t, 0.1, 1.0);
  EXPECT_NEAR(r.value, 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(r.new_norm_target, 1.0);
}

TEST(NormAlignmentLoss, FirstStepOnlySetsTheTarget) {
  // The filter drops the smaller channel: norms 4 and 11.
  const FeatureSet s = MakeSet(-1, {{3, 4}, {11, 1}});
  const NormAlignmentResult r = NormAlignmentLoss(s, FeatureSet(-1, Domain::kTarget, 2), 0.1,
                                                  std::nullopt);
  EXPECT_TRUE(r.skipped);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_DOUBLE_EQ(r.new_norm_target, 7.5);
}

TEST(NormAlignmentLoss, ZeroVectorsAreExcluded) {
  const FeatureSet s = MakeSet(-1, {{1.0, 1.0}, {0.0, 0.0}});
  const NormAlignmentResult r = NormAlignmentLoss(s, FeatureSet(-1, Domain::kTarget, 2), 0.0,
                                                  std::sqrt(2.0));
  EXPECT_EQ(r.excluded, 1);
  EXPECT_NEAR(r.value, 0.0, 1e-15);
}

TEST(NormAlignmentLoss, SuppressedChannelsGetExactlyZeroGradient) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec> vs(3, Vec(5));
    for (auto& v : vs) {
      for (double& x : v) x = rng.Uniform();
    }
    const FeatureSet s = MakeSet(-1, vs);
    const NormAlignmentResult r =
        NormAlignmentLoss(s, FeatureSet(-1, Domain::kTarget, 5), 0.1, 0.5 + rng.Uniform());
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const FilteredVector f = NormFilter(vs[i]);
      for (int k = 0; k < 5; ++k) {
        if (!f.kept[k]) EXPECT_EQ(r.source_grads[i * 5 + k], 0.0);
      }
    }
  }
}

TEST(NormAlignmentLossProperty, ScaleInvariantWithoutDelta) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec> vs(4, Vec(3)), scaled;
    const double alpha = 0.1 + rng.Uniform() * 20;
    for (auto& v : vs) {
      for (double& x : v) x = rng.Uniform();
      Vec w = v;
      for (double& x : w) x *= alpha;
      scaled.push_back(w);
    }
    const double target = 0.2 + rng.Uniform();
    const double a = NormAlignmentLoss(MakeSet(-1, vs), FeatureSet(-1, Domain::kTarget, 3), 0.0,
                                       target)
                         .value;
    const double b = NormAlignmentLoss(MakeSet(-1, scaled), FeatureSet(-1, Domain::kTarget, 3),
                                       0.0, target * alpha)
                         .value;
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a));
  }
}

LossTerm Term(double value, double grad) {
  LossTerm t;
  t.value = value;
  t.grads.source_features.push_back(Tensor({1, 1, 2}, {grad, -grad}));
  return t;
}

TEST(TotalLoss, ZeroWeightsLeaveCrossEntropy) {
  LossTerms terms;
  terms.ce = Term(0.3, 1.0);
  terms.clust_source = Term(0.5, 2.0);
  terms.perp = Term(0.7, 3.0);
  terms.norm = Term(0.2, 4.0);
  terms.em = Term(-0.4, 5.0);
  const LossBundle b = TotalLoss(terms, LossWeights{0, 0, 0, 0, 0.1});
  EXPECT_DOUBLE_EQ(b.values.total, 0.3);
  EXPECT_DOUBLE_EQ(b.grads.source_features[0][0], 1.0);
}

TEST(TotalLoss, WeightedSumOfValuesAndGradients) {
  LossTerms terms;
  terms.ce = Term(0.3, 1.0);
  terms.clust_source = Term(0.5, 2.0);
  const LossBundle b = TotalLoss(terms, LossWeights{1, 0, 0, 0, 0.1});
  EXPECT_DOUBLE_EQ(b.values.total, 0.8);
  EXPECT_DOUBLE_EQ(b.grads.source_features[0][1], -3.0);

  terms.clust_target = Term(0.25, 8.0);
  terms.perp = Term(0.5, 3.0);
  terms.norm = Term(0.2, 4.0);
  terms.em = Term(-0.4, 5.0);
  const LossWeights w{0.1, 0.5, 0.025, 0.2, 0.1};
  const LossBundle all = TotalLoss(terms, w);
  EXPECT_NEAR(all.values.total, 0.3 + 0.1 * 0.75 + 0.5 * 0.5 + 0.025 * 0.2 - 0.2 * 0.4, 1e-15);
  EXPECT_NEAR(all.grads.source_features[0][0], 1 + 0.1 * 10 + 0.5 * 3 + 0.025 * 4 + 0.2 * 5,
              1e-14);
}

TEST(LossWeights, NegativeValuesAreRejected) {
  LossWeights w;
  w.lambda_p = -1;
  EXPECT_THROW(w.Validate(), Error);
  w = LossWeights{};
  w.delta_f = -0.1;
  EXPECT_THROW(w.Validate(), Error);
}

}  // namespace
}  // namespace lsr
