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

#ifndef LSR_SYNTH_HPP_
#define LSR_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsr/core.hpp"
#include "lsr/rng.hpp"

namespace lsr {

using Color = std::array<double, 3>;

struct DomainShift {
  Color color_offset{0.0, 0.0, 0.0};
  // Per-class colour offsets are drawn uniformly from [-class_jitter, class_jitter].
  double class_jitter = 0.0;
  // Target texture noise is noise_multiplier times the source noise.
  double noise_multiplier = 1.0;
};

// Scenes are a background (class 0) with rectangular and elliptical blobs of
// the other classes painted on top in sequence.
struct SceneConfig {
  int height = 64;
  int width = 64;
  int num_classes = 5;
  int blobs_min = 2;
  int blobs_max = 4;
  // Half-axis length range of a blob, in pixels. Blobs always lie inside the
  // image.
  int axis_min = 5;
  int axis_max = 12;
  std::vector<Color> class_colors;
  std::vector<double> class_sigma;
  // Probability of each foreground class (1..num_classes-1) per blob.
  std::vector<double> blob_class_probs;
  DomainShift shift;

  // Five-class desk benchmark.
  static SceneConfig Default();
  void Validate() const;
};

struct Scene {
  Image image;
  LabelMap labels;
};

inline constexpr int kVoidLabel = 255;

Scene GenerateScene(const SceneConfig& cfg, Rng& rng);

// Concrete per-class offsets of one target domain.
struct DomainShiftSample {
  std::vector<Color> class_offsets;  // color_offset + jitter, per class
  double extra_noise_scale = 0.0;     // sqrt(multiplier^2 - 1) when > 1
};

DomainShiftSample SampleDomainShift(const SceneConfig& cfg, Rng& rng);

// Adds the sampled offsets to every labelled pixel plus extra Gaussian
// texture noise, then clamps to [0, 1]. Void pixels only get the global
// offset.
Image ApplyDomainShift(const Image& image, const LabelMap& labels,
                       const DomainShiftSample& sample, const SceneConfig& cfg, Rng& rng);

// SampleDomainShift followed by ApplyDomainShift on one image.
Image ShiftDomain(const Image& image, const LabelMap& labels, const SceneConfig& cfg,
                  Rng& rng);

enum class PerturbationFamily { kGaussianNoise, kMotionBlur, kSnowSpeckle, kFogContrast, kBrightness };

inline constexpr std::array<PerturbationFamily, 5> kAllPerturbations = {
    PerturbationFamily::kGaussianNoise, PerturbationFamily::kMotionBlur,
    PerturbationFamily::kSnowSpeckle, PerturbationFamily::kFogContrast,
    PerturbationFamily::kBrightness};

std::string PerturbationName(PerturbationFamily family);
PerturbationFamily ParsePerturbation(const std::string& name);

struct Perturbation {
  PerturbationFamily family = PerturbationFamily::kGaussianNoise;
  int level = 1;  // 1..5; 0 is accepted as the identity
};

// Severity per level k (1..5):
//   gaussian_noise  additive N(0, sigma) with sigma = 0.06 k
//   motion_blur     horizontal box filter of width 2k + 1
//   snow_speckle    each pixel turns white with probability 0.03 k
//   fog_contrast    blend toward grey 0.5 with weight 0.15 k
//   brightness      + 0.06 k on every channel
// All results are clamped to [0, 1]. Random draws do not depend on the
// level, so stronger levels corrupt a superset of what weaker ones do.
Image Perturb(const Image& image, const Perturbation& p, Rng& rng);

double MeanSquaredError(const Image& a, const Image& b);

struct Dataset {
  std::vector<Image> images;
  std::vector<LabelMap> labels;

  std::size_t size() const { return images.size(); }
};

struct Benchmark {
  ClassSet classes;
  SceneConfig scene;
  Dataset source_train;
  Dataset source_val;
  Dataset target_train;
  Dataset target_val;
};

// Source scenes use the plain appearance; target scenes get one domain
// shift sample shared by the whole target domain. Pure function of
// (cfg, sizes, seed).
Benchmark MakeBenchmark(const SceneConfig& cfg, int train_size, int val_size,
                        std::uint64_t seed);

// Copy of `bench` whose target images are perturbed; labels unchanged.
Benchmark PerturbTarget(const Benchmark& bench, const Perturbation& p, std::uint64_t seed);

// Manifest: "LSRMANIFEST", "classes <n> <void_id> <names...>", then one
// "<domain> <split> <image path> <label path>" line per scene, paths
// relative to the manifest directory.
void SaveBenchmark(const std::filesystem::path& dir, const Benchmark& bench);
Benchmark LoadBenchmark(const std::filesystem::path& manifest);

}  // namespace lsr

#endif  // LSR_SYNTH_HPP_
