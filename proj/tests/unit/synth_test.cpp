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
#include <filesystem>

#include <gtest/gtest.h>

#include "lsr/synth.hpp"

namespace lsr {
namespace {

SceneConfig Flat() {
  SceneConfig cfg = SceneConfig::Default();
  cfg.num_classes = 1;
  cfg.blobs_min = cfg.blobs_max = 0;
  cfg.class_colors = {{0.2, 0.4, 0.6}};
  cfg.class_sigma = {0.0};
  cfg.blob_class_probs.clear();
  cfg.shift = DomainShift{};
  return cfg;
}

TEST(GenerateScene, ZeroNoiseNoBlobsIsConstant) {
  Rng rng(1);
  const Scene s = GenerateScene(Flat(), rng);
  for (int v : s.labels.data()) EXPECT_EQ(v, 0);
  for (int r = 0; r < s.image.height; ++r) {
    for (int c = 0; c < s.image.width; ++c) {
      EXPECT_EQ(s.image.at(r, c, 0), 0.2);
      EXPECT_EQ(s.image.at(r, c, 2), 0.6);
    }
  }
}

TEST(GenerateScene, SameSeedSameScene) {
  Rng a(7), b(7);
  const Scene sa = GenerateScene(SceneConfig::Default(), a);
  const Scene sb = GenerateScene(SceneConfig::Default(), b);
  EXPECT_EQ(sa.image, sb.image);
  EXPECT_EQ(sa.labels, sb.labels);
}

TEST(GenerateScene, ImageInUnitRangeAndLabelsValid) {
  Rng rng(3);
  const SceneConfig cfg = SceneConfig::Default();
  const ClassSet classes = ClassSet::Numbered(cfg.num_classes, kVoidLabel);
  for (int i = 0; i < 20; ++i) {
    const Scene s = GenerateScene(cfg, rng);
    EXPECT_NO_THROW(s.labels.Validate(classes));
    for (double v : s.image.data) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(GenerateScene, ForegroundSharesFollowBlobPriors) {
  // Blob geometry does not depend on the class and paint order is random,
  // so the expected foreground pixel share of class c is its blob
  // probability.
  SceneConfig cfg = SceneConfig::Default();
  cfg.blob_class_probs = {0.1, 0.2, 0.3, 0.4};
  Rng rng(2);
  std::vector<double> counts(cfg.num_classes, 0.0);
  for (int i = 0; i < 100; ++i) {
    const Scene scene = GenerateScene(cfg, rng);
    for (int v : scene.labels.data()) counts[v] += 1.0;
  }
  const double fg = counts[1] + counts[2] + counts[3] + counts[4];
  for (int c = 1; c < cfg.num_classes; ++c) {
    EXPECT_NEAR(counts[c] / fg, cfg.blob_class_probs[c - 1], 0.10) << "class " << c;
  }
  EXPECT_GT(counts[0], fg);  // background dominates
}

TEST(ShiftDomain, ZeroShiftIsIdentity) {
  SceneConfig cfg = SceneConfig::Default();
  cfg.shift = DomainShift{};
  Rng rng(5);
  const Scene s = GenerateScene(cfg, rng);
  EXPECT_EQ(ShiftDomain(s.image, s.labels, cfg, rng), s.image);
}

TEST(ShiftDomain, OffsetOnConstantImage) {
  SceneConfig cfg = Flat();
  cfg.class_colors = {{0.5, 0.5, 0.5}};
  cfg.shift.color_offset = {0.2, 0.2, 0.2};
  Rng rng(5);
  const Scene s = GenerateScene(cfg, rng);
  const Image shifted = ShiftDomain(s.image, s.labels, cfg, rng);
  for (double v : shifted.data) EXPECT_NEAR(v, 0.7, 1e-15);
}

TEST(ShiftDomain, SeedsDifferOnlyThroughJitter) {
  SceneConfig cfg = Flat();
  cfg.class_colors = {{0.5, 0.5, 0.5}};
  cfg.shift.color_offset = {0.1, 0.0, -0.1};
  Rng scene_rng(1);
  const Scene s = GenerateScene(cfg, scene_rng);
  Rng a(10), b(11);
  EXPECT_EQ(ShiftDomain(s.image, s.labels, cfg, a), ShiftDomain(s.image, s.labels, cfg, b));
  cfg.shift.class_jitter = 0.05;
  Rng c(10), d(11);
  EXPECT_NE(ShiftDomain(s.image, s.labels, cfg, c), ShiftDomain(s.image, s.labels, cfg, d));
}

TEST(Perturb, LevelZeroIsIdentity) {
  Rng scene_rng(4);
  const Scene s = GenerateScene(SceneConfig::Default(), scene_rng);
  for (PerturbationFamily f : kAllPerturbations) {
    Rng rng(1);
    EXPECT_EQ(Perturb(s.image, {f, 0}, rng), s.image) << PerturbationName(f);
  }
}

TEST(Perturb, BrightnessAddsSixHundredthsPerLevel) {
  SceneConfig cfg = Flat();
  Rng scene_rng(4);
  const Scene s = GenerateScene(cfg, scene_rng);
  for (int k = 1; k <= 5; ++k) {
    Rng rng(1);
    const Image out = Perturb(s.image, {PerturbationFamily::kBrightness, k}, rng);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      EXPECT_NEAR(out.data[i], std::min(1.0, s.image.data[i] + 0.06 * k), 1e-15);
    }
  }
}

TEST(PerturbProperty, SeverityStrictlyIncreasesWithLevel) {
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng scene_rng(seed);
    const Scene s = GenerateScene(SceneConfig::Default(), scene_rng);
    for (PerturbationFamily f : kAllPerturbations) {
      double prev = 0.0;
      for (int k = 1; k <= 5; ++k) {
        Rng rng(seed + 100);
        const double mse = MeanSquaredError(s.image, Perturb(s.image, {f, k}, rng));
        EXPECT_GT(mse, prev) << PerturbationName(f) << " level " << k;
        prev = mse;
      }
    }
  }
}

TEST(Perturb, InvalidLevelAndNameAreErrors) {
  Rng rng(1);
  EXPECT_THROW(Perturb(Image(4, 4, 3), {PerturbationFamily::kFogContrast, 6}, rng), Error);
  EXPECT_THROW(ParsePerturbation("hail"), Error);
  for (PerturbationFamily f : kAllPerturbations) {
    EXPECT_EQ(ParsePerturbation(PerturbationName(f)), f);
  }
}

TEST(Benchmark, PureFunctionOfConfigAndSeed) {
  SceneConfig cfg = SceneConfig::Default();
  cfg.height = cfg.width = 32;
  cfg.axis_max = 8;
  const Benchmark a = MakeBenchmark(cfg, 3, 2, 9);
  const Benchmark b = MakeBenchmark(cfg, 3, 2, 9);
  const Benchmark c = MakeBenchmark(cfg, 3, 2, 10);
  EXPECT_EQ(a.target_train.images, b.target_train.images);
  EXPECT_EQ(a.source_val.labels, b.source_val.labels);
  EXPECT_NE(a.source_train.images, c.source_train.images);
  EXPECT_EQ(a.target_val.size(), 2u);
}

TEST(Benchmark, PerturbTargetKeepsLabelsAndSource) {
  SceneConfig cfg = SceneConfig::Default();
  cfg.height = cfg.width = 32;
  cfg.axis_max = 8;
  const Benchmark bench = MakeBenchmark(cfg, 2, 2, 1);
  const Benchmark p = PerturbTarget(bench, {PerturbationFamily::kGaussianNoise, 3}, 1);
  EXPECT_EQ(p.source_train.images, bench.source_train.images);
  EXPECT_EQ(p.target_val.labels, bench.target_val.labels);
  EXPECT_NE(p.target_val.images, bench.target_val.images);
}

TEST(Benchmark, ManifestRoundTrip) {
  SceneConfig cfg = SceneConfig::Default();
  cfg.height = cfg.width = 16;
  cfg.axis_min = 2;
  cfg.axis_max = 4;
  const Benchmark bench = MakeBenchmark(cfg, 2, 1, 3);
  const auto dir = std::filesystem::temp_directory_path() / "lsr_manifest_test";
  std::filesystem::remove_all(dir);
  SaveBenchmark(dir, bench);
  const Benchmark loaded = LoadBenchmark(dir / "manifest.txt");
  EXPECT_EQ(loaded.classes.names(), bench.classes.names());
  EXPECT_EQ(loaded.source_train.images, bench.source_train.images);
  EXPECT_EQ(loaded.target_val.labels, bench.target_val.labels);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lsr
