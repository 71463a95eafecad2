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

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "lsr/metrics.hpp"
#include "lsr/rng.hpp"

namespace lsr {
namespace {

constexpr int kVoid = 255;

std::vector<MaybeValue> Load(const std::string& name, std::vector<std::string>* names = nullptr) {
  std::ifstream is(std::string(LSR_TEST_DATA_DIR) + "/" + name);
  EXPECT_TRUE(is.good()) << name;
  return ReadIoUColumn(is, names);
}

TEST(ConfusionAndIoU, IdenticalMapsGiveOne) {
  const LabelMap m(2, 2, kVoid, std::vector<int>{0, 1, 2, 1});
  const IoUResult r = ConfusionAndIoU(m, m, ClassSet::Numbered(4));
  EXPECT_EQ(r.iou[0], 1.0);
  EXPECT_EQ(r.iou[2], 1.0);
  EXPECT_FALSE(r.present[3]);
  EXPECT_EQ(r.miou, 1.0);
  EXPECT_EQ(r.pixel_accuracy, 1.0);
}

TEST(ConfusionAndIoU, DisjointIsZero) {
  const LabelMap gt(1, 2, kVoid, std::vector<int>{0, 1});
  const LabelMap pred(1, 2, kVoid, std::vector<int>{1, 0});
  const IoUResult r = ConfusionAndIoU(pred, gt, ClassSet::Numbered(2));
  EXPECT_EQ(r.iou[0], 0.0);
  EXPECT_EQ(r.iou[1], 0.0);
}

TEST(ConfusionAndIoU, HalfOverlapIsOneThird) {
  const LabelMap gt(1, 4, kVoid, std::vector<int>{1, 1, 0, 0});
  const LabelMap pred(1, 4, kVoid, std::vector<int>{0, 1, 1, 0});
  EXPECT_DOUBLE_EQ(ConfusionAndIoU(pred, gt, ClassSet::Numbered(2)).iou[1], 1.0 / 3.0);
}

TEST(ConfusionAndIoU, VoidGroundTruthIgnoredVoidPredictionCountsAsMiss) {
  const LabelMap gt(1, 3, kVoid, std::vector<int>{0, kVoid, 0});
  const LabelMap pred(1, 3, kVoid, std::vector<int>{0, 1, kVoid});
  const IoUResult r = ConfusionAndIoU(pred, gt, ClassSet::Numbered(2));
  EXPECT_DOUBLE_EQ(r.iou[0], 0.5);
  EXPECT_FALSE(r.present[1]);
}

TEST(ConfusionAndIoU, DimensionMismatchIsAnError) {
  EXPECT_THROW(ConfusionAndIoU(LabelMap(1, 2, kVoid, 0), LabelMap(2, 1, kVoid, 0),
                               ClassSet::Numbered(1)),
               Error);
}

TEST(ConfusionAndIoUProperty, SwappingPredictionAndTruthKeepsIoU) {
  Rng rng(21);
  const ClassSet classes = ClassSet::Numbered(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> a(30), b(30);
    for (int& v : a) v = static_cast<int>(rng.UniformInt(std::uint64_t{4}));
    for (int& v : b) v = static_cast<int>(rng.UniformInt(std::uint64_t{4}));
    const LabelMap ma(5, 6, kVoid, a), mb(5, 6, kVoid, b);
    const IoUResult x = ConfusionAndIoU(ma, mb, classes);
    const IoUResult y = ConfusionAndIoU(mb, ma, classes);
    EXPECT_EQ(x.iou, y.iou);
  }
}

TEST(Masr, EqualIoUsGiveHundred) {
  const std::vector<MaybeValue> iou{0.5, 0.7, std::nullopt, 0.1};
  EXPECT_DOUBLE_EQ(*Masr(iou, iou).masr, 100.0);
}

TEST(Masr, TableGoldens) {
  std::vector<std::string> names;
  const auto target_only = Load("iou_target_only.csv", &names);
  EXPECT_EQ(names[0], "road");
  const ClassReport lsr_plus = Masr(Load("iou_gtav_lsr_plus.csv"), target_only);
  EXPECT_NEAR(*lsr_plus.masr, 69.5, 0.1);
  const ClassReport source = Masr(Load("iou_gtav_source_only.csv"), target_only);
  EXPECT_NEAR(*source.masr, 54.0, 0.1);
  const std::vector<int> thirteen{0, 1, 2, 6, 7, 8, 10, 11, 12, 13, 15, 17, 18};
  const ClassReport synthia = Masr(Load("iou_synthia_lsr_plus.csv"), target_only, thirteen);
  EXPECT_NEAR(*synthia.masr_restricted, 62.1, 0.1);
  EXPECT_NEAR(*synthia.masr, 57.7, 0.1);
}

TEST(Masr, ZeroSupervisedIoUIsExcludedWithWarning) {
  const std::vector<MaybeValue> a{0.5, 0.2}, s{0.0, 0.4};
  const ClassReport r = Masr(a, s);
  EXPECT_FALSE(r.asr[0].has_value());
  EXPECT_DOUBLE_EQ(*r.masr, 50.0);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Masr, RatiosAreNotClipped) {
  const std::vector<MaybeValue> a{0.6}, s{0.3};
  EXPECT_DOUBLE_EQ(*Masr(a, s).masr, 200.0);
}

TEST(MasrProperty, ScaleCovariantAndPermutationInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<MaybeValue> a(6), s(6);
    for (int c = 0; c < 6; ++c) {
      a[c] = rng.Uniform() * 0.5;
      s[c] = 0.05 + rng.Uniform() * 0.9;
    }
    const double alpha = rng.Uniform() * 2.0;
    std::vector<MaybeValue> scaled = a;
    for (auto& v : scaled) *v *= alpha;
    const double base = *Masr(a, s).masr;
    EXPECT_NEAR(*Masr(scaled, s).masr, alpha * base, 1e-12);
    std::vector<MaybeValue> ap(a.rbegin(), a.rend()), sp(s.rbegin(), s.rend());
    EXPECT_NEAR(*Masr(ap, sp).masr, base, 1e-12);
  }
}

TEST(Masr, CsvRoundTripThroughReportWriter) {
  const std::vector<MaybeValue> a{0.5, std::nullopt, 0.25}, s{1.0, 0.5, 0.5};
  const ClassReport r = Masr(a, s, std::vector<int>{0, 2}, {"x", "y", "z"});
  std::stringstream ss;
  WriteClassReportCsv(ss, r);
  std::vector<std::string> names;
  const auto back = ReadIoUColumn(ss, &names);
  EXPECT_EQ(back, a);
  EXPECT_EQ(names, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_DOUBLE_EQ(*r.masr_restricted, 50.0);
}

PrototypeBank Bank(const std::vector<Vec>& protos) {
  PrototypeBank bank(static_cast<int>(protos.size()), static_cast<int>(protos[0].size()));
  for (int c = 0; c < static_cast<int>(protos.size()); ++c) bank.Set(c, protos[c]);
  return bank;
}

TEST(MeanInterPrototypeAngle, Examples) {
  const PerClassStat ortho = MeanInterPrototypeAngle(Bank({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}));
  EXPECT_NEAR(*ortho.mean, 90.0, 1e-12);
  EXPECT_NEAR(*MeanInterPrototypeAngle(Bank({{1, 2}, {1, 2}})).mean, 0.0, 1e-6);
  EXPECT_NEAR(*MeanInterPrototypeAngle(Bank({{1, 0}, {1, 1}})).mean, 45.0, 1e-12);
}

TEST(MeanInterPrototypeAngle, ZeroPrototypeSkippedWithWarning) {
  const PerClassStat r = MeanInterPrototypeAngle(Bank({{1, 0}, {0, 1}, {0, 0}}));
  EXPECT_FALSE(r.per_class[2].has_value());
  EXPECT_NEAR(*r.mean, 90.0, 1e-12);
  EXPECT_EQ(r.warnings.size(), 1u);
}

FeatureSet MakeSet(int c, const std::vector<Vec>& vs) {
  FeatureSet set(c, Domain::kTarget, static_cast<int>(vs[0].size()));
  for (const auto& v : vs) set.Add(v, {});
  return set;
}

TEST(MeanChannelEntropy, Examples) {
  const std::vector<FeatureSet> sets{MakeSet(0, {{0, 3, 0}}), MakeSet(1, {{2, 2, 2, 2}}),
                                     MakeSet(2, {{3, 1}})};
  const PerClassStat r = MeanChannelEntropy(sets);
  EXPECT_EQ(*r.per_class[0], 0.0);
  EXPECT_NEAR(*r.per_class[1], std::log(4.0), 1e-15);
  EXPECT_NEAR(*r.per_class[2], -0.75 * std::log(0.75) - 0.25 * std::log(0.25), 1e-15);
  EXPECT_NEAR(*r.per_class[2], 0.5623, 1e-4);
}

TEST(MeanChannelEntropy, AllZeroVectorSkippedWithWarning) {
  const std::vector<FeatureSet> sets{MakeSet(0, {{0, 0}, {1, 1}})};
  const PerClassStat r = MeanChannelEntropy(sets);
  EXPECT_NEAR(*r.per_class[0], std::log(2.0), 1e-15);
  EXPECT_EQ(r.warnings.size(), 1u);
}

}  // namespace
}  // namespace lsr
