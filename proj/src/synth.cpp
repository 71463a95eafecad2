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

#include "lsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "lsr/io.hpp"

namespace lsr {

namespace {

double Clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Stream ids used to fork independent generators from a benchmark seed.
enum Stream : std::uint64_t {
  kSourceTrain = 1,
  kSourceVal = 2,
  kTargetTrain = 3,
  kTargetVal = 4,
  kShiftSample = 5,
  kShiftNoise = 6,
  kPerturb = 7,
};

int SampleClass(const std::vector<double>& probs, Rng& rng) {
  double total = 0.0;
  for (double p : probs) total += p;
  double u = rng.Uniform() * total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return static_cast<int>(i) + 1;
    u -= probs[i];
  }
  return static_cast<int>(probs.size());
}

Dataset MakeSplit(const SceneConfig& cfg, int size, Rng rng, const DomainShiftSample* shift,
                  Rng noise_rng) {
  Dataset out;
  for (int i = 0; i < size; ++i) {
    Rng scene_rng = rng.Fork(static_cast<std::uint64_t>(i));
    Scene scene = GenerateScene(cfg, scene_rng);
    if (shift) {
      Rng image_noise = noise_rng.Fork(static_cast<std::uint64_t>(i));
      scene.image = ApplyDomainShift(scene.image, scene.labels, *shift, cfg, image_noise);
    }
    out.images.push_back(std::move(scene.image));
    out.labels.push_back(std::move(scene.labels));
  }
  return out;
}

}  // namespace

SceneConfig SceneConfig::Default() {
  SceneConfig cfg;
  cfg.class_colors = {
      {0.45, 0.45, 0.45},  // background
      {0.80, 0.30, 0.25},
      {0.30, 0.70, 0.30},
      {0.25, 0.35, 0.80},
      {0.80, 0.75, 0.25},
  };
  cfg.class_sigma = {0.06, 0.08, 0.08, 0.08, 0.08};
  cfg.blob_class_probs = {0.25, 0.25, 0.25, 0.25};
  cfg.shift.color_offset = {0.15, -0.10, 0.15};
  cfg.shift.class_jitter = 0.03;
  cfg.shift.noise_multiplier = 2.0;
  return cfg;
}

void SceneConfig::Validate() const {
  if (height <= 0 || width <= 0) throw Error("scene dimensions must be positive");
  if (num_classes < 1) throw Error("scene needs at least one class");
  if (blobs_min < 0 || blobs_max < blobs_min) throw Error("invalid blob count range");
  if (axis_min < 1 || axis_max < axis_min) throw Error("invalid blob axis range");
  if (blobs_max > 0 && (2 * axis_max > height || 2 * axis_max > width)) {
    throw Error("blobs of half-axis " + std::to_string(axis_max) + " do not fit the scene");
  }
  if (static_cast<int>(class_colors.size()) != num_classes ||
      static_cast<int>(class_sigma.size()) != num_classes) {
    throw Error("expected one colour and one sigma per class");
  }
  for (double s : class_sigma) {
    if (s < 0.0) throw Error("texture sigma must be non-negative");
  }
  if (blobs_max > 0) {
    if (num_classes < 2) throw Error("blobs need at least one foreground class");
    if (static_cast<int>(blob_class_probs.size()) != num_classes - 1) {
      throw Error("expected one blob probability per foreground class");
    }
    double total = 0.0;
    for (double p : blob_class_probs) {
      if (p < 0.0) throw Error("blob probabilities must be non-negative");
      total += p;
    }
    if (!(total > 0.0)) throw Error("blob probabilities must not all be zero");
  }
  if (shift.class_jitter < 0.0) throw Error("class jitter must be non-negative");
  if (shift.noise_multiplier < 0.0) throw Error("noise multiplier must be non-negative");
}

Scene GenerateScene(const SceneConfig& cfg, Rng& rng) {
  cfg.Validate();
  Scene scene;
  scene.labels = LabelMap(cfg.height, cfg.width, kVoidLabel, 0);
  const int blobs = rng.UniformInt(cfg.blobs_min, cfg.blobs_max);
  for (int b = 0; b < blobs; ++b) {
    const int cls = SampleClass(cfg.blob_class_probs, rng);
    const bool ellipse = rng.Bernoulli(0.5);
    const int ax = rng.UniformInt(cfg.axis_min, cfg.axis_max);
    const int ay = rng.UniformInt(cfg.axis_min, cfg.axis_max);
    const int cx = rng.UniformInt(ax, cfg.width - ax);
    const int cy = rng.UniformInt(ay, cfg.height - ay);
    for (int r = cy - ay; r < cy + ay; ++r) {
      for (int c = cx - ax; c < cx + ax; ++c) {
        if (ellipse) {
          const double dx = (c + 0.5 - cx) / ax;
          const double dy = (r + 0.5 - cy) / ay;
          if (dx * dx + dy * dy > 1.0) continue;
        }
        scene.labels.at(r, c) = cls;
      }
    }
  }
  scene.image = Image(cfg.height, cfg.width, 3);
  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      const int cls = scene.labels.at(r, c);
      for (int ch = 0; ch < 3; ++ch) {
        double v = cfg.class_colors[cls][ch];
        if (cfg.class_sigma[cls] > 0.0) v += rng.Normal(0.0, cfg.class_sigma[cls]);
        scene.image.at(r, c, ch) = Clamp01(v);
      }
    }
  }
  return scene;
}

DomainShiftSample SampleDomainShift(const SceneConfig& cfg, Rng& rng) {
  DomainShiftSample sample;
  sample.class_offsets.resize(cfg.num_classes);
  for (int c = 0; c < cfg.num_classes; ++c) {
    for (int ch = 0; ch < 3; ++ch) {
      double jitter = 0.0;
      if (cfg.shift.class_jitter > 0.0) {
        jitter = rng.Uniform(-cfg.shift.class_jitter, cfg.shift.class_jitter);
      }
      sample.class_offsets[c][ch] = cfg.shift.color_offset[ch] + jitter;
    }
  }
  const double m = cfg.shift.noise_multiplier;
  sample.extra_noise_scale = m > 1.0 ? std::sqrt(m * m - 1.0) : 0.0;
  return sample;
}

Image ApplyDomainShift(const Image& image, const LabelMap& labels,
                       const DomainShiftSample& sample, const SceneConfig& cfg, Rng& rng) {
  if (image.height != labels.height() || image.width != labels.width()) {
    throw Error("domain shift: image and labels differ in size");
  }
  Image out = image;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const int cls = labels.at(r, c);
      const bool labelled = cls >= 0 && cls < cfg.num_classes;
      for (int ch = 0; ch < image.channels && ch < 3; ++ch) {
        double v = image.at(r, c, ch);
        v += labelled ? sample.class_offsets[cls][ch] : cfg.shift.color_offset[ch];
        if (labelled && sample.extra_noise_scale > 0.0 && cfg.class_sigma[cls] > 0.0) {
          v += rng.Normal(0.0, sample.extra_noise_scale * cfg.class_sigma[cls]);
        }
        out.at(r, c, ch) = Clamp01(v);
      }
    }
  }
  return out;
}

Image ShiftDomain(const Image& image, const LabelMap& labels, const SceneConfig& cfg,
                  Rng& rng) {
  const DomainShiftSample sample = SampleDomainShift(cfg, rng);
  return ApplyDomainShift(image, labels, sample, cfg, rng);
}

std::string PerturbationName(PerturbationFamily family) {
  switch (family) {
    case PerturbationFamily::kGaussianNoise: return "gaussian_noise";
    case PerturbationFamily::kMotionBlur: return "motion_blur";
    case PerturbationFamily::kSnowSpeckle: return "snow_speckle";
    case PerturbationFamily::kFogContrast: return "fog_contrast";
    case PerturbationFamily::kBrightness: return "brightness";
  }
  return "unknown";
}

PerturbationFamily ParsePerturbation(const std::string& name) {
  for (auto f : kAllPerturbations) {
    if (PerturbationName(f) == name) return f;
  }
  throw Error("unknown perturbation family '" + name + "'");
}

Image Perturb(const Image& image, const Perturbation& p, Rng& rng) {
  if (p.level < 0 || p.level > 5) {
    throw Error("perturbation level " + std::to_string(p.level) + " outside 0..5");
  }
  if (p.level == 0) return image;
  const double k = p.level;
  Image out = image;
  switch (p.family) {
    case PerturbationFamily::kGaussianNoise: {
      const double sigma = 0.06 * k;
      for (auto& v : out.data) v = Clamp01(v + sigma * rng.Normal());
      break;
    }
    case PerturbationFamily::kMotionBlur: {
      const int half = p.level;
      for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
          for (int ch = 0; ch < image.channels; ++ch) {
            double sum = 0.0;
            for (int d = -half; d <= half; ++d) {
              const int cc = std::clamp(c + d, 0, image.width - 1);
              sum += image.at(r, cc, ch);
            }
            out.at(r, c, ch) = sum / (2 * half + 1);
          }
        }
      }
      break;
    }
    case PerturbationFamily::kSnowSpeckle: {
      const double density = 0.03 * k;
      for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
          const double u = rng.Uniform();
          const double flake = 0.9 + 0.1 * rng.Uniform();
          if (u < density) {
            for (int ch = 0; ch < image.channels; ++ch) out.at(r, c, ch) = flake;
          }
        }
      }
      break;
    }
    case PerturbationFamily::kFogContrast: {
      const double alpha = 0.15 * k;
      for (auto& v : out.data) v = Clamp01((1.0 - alpha) * v + alpha * 0.5);
      break;
    }
    case PerturbationFamily::kBrightness: {
      for (auto& v : out.data) v = Clamp01(v + 0.06 * k);
      break;
    }
  }
  return out;
}

double MeanSquaredError(const Image& a, const Image& b) {
  if (a.data.size() != b.data.size()) throw Error("MSE: image sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return a.data.empty() ? 0.0 : s / static_cast<double>(a.data.size());
}

Benchmark MakeBenchmark(const SceneConfig& cfg, int train_size, int val_size,
                        std::uint64_t seed) {
  cfg.Validate();
  if (train_size <= 0 || val_size <= 0) throw Error("split sizes must be positive");
  const Rng root(seed);
  Benchmark bench;
  bench.classes = ClassSet::Numbered(cfg.num_classes, kVoidLabel);
  bench.scene = cfg;
  Rng shift_rng = root.Fork(kShiftSample);
  const DomainShiftSample shift = SampleDomainShift(cfg, shift_rng);
  const Rng noise = root.Fork(kShiftNoise);
  bench.source_train = MakeSplit(cfg, train_size, root.Fork(kSourceTrain), nullptr, noise);
  bench.source_val = MakeSplit(cfg, val_size, root.Fork(kSourceVal), nullptr, noise);
  bench.target_train =
      MakeSplit(cfg, train_size, root.Fork(kTargetTrain), &shift, noise.Fork(kTargetTrain));
  bench.target_val =
      MakeSplit(cfg, val_size, root.Fork(kTargetVal), &shift, noise.Fork(kTargetVal));
  return bench;
}

Benchmark PerturbTarget(const Benchmark& bench, const Perturbation& p, std::uint64_t seed) {
  Benchmark out = bench;
  const Rng root = Rng(seed).Fork(kPerturb);
  auto apply = [&](Dataset& split, std::uint64_t stream) {
    const Rng split_rng = root.Fork(stream);
    for (std::size_t i = 0; i < split.images.size(); ++i) {
      Rng rng = split_rng.Fork(i);
      split.images[i] = Perturb(split.images[i], p, rng);
    }
  };
  apply(out.target_train, kTargetTrain);
  apply(out.target_val, kTargetVal);
  return out;
}

void SaveBenchmark(const std::filesystem::path& dir, const Benchmark& bench) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "LSRMANIFEST\nclasses " << bench.classes.size() << ' '
           << bench.classes.void_id();
  for (const auto& n : bench.classes.names()) manifest << ' ' << n;
  manifest << '\n';
  auto write_split = [&](const Dataset& split, const char* domain, const char* name) {
    for (std::size_t i = 0; i < split.size(); ++i) {
      const std::string stem = fmt::format("{}/{}_{:04d}", domain, name, i);
      io::SaveImage(dir / (stem + ".img"), split.images[i]);
      io::SaveLabelMap(dir / (stem + ".lbl"), split.labels[i]);
      manifest << domain << ' ' << name << ' ' << stem << ".img " << stem << ".lbl\n";
    }
  };
  write_split(bench.source_train, "source", "train");
  write_split(bench.source_val, "source", "val");
  write_split(bench.target_train, "target", "train");
  write_split(bench.target_val, "target", "val");
  io::WriteTextFile(dir / "manifest.txt", manifest.str());
}

Benchmark LoadBenchmark(const std::filesystem::path& manifest) {
  std::ifstream is(manifest);
  if (!is) throw Error("cannot open manifest '" + manifest.string() + "'");
  const auto base = manifest.parent_path();
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(manifest.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(is, line) || line != "LSRMANIFEST") {
    line_no = 1;
    fail("missing LSRMANIFEST header");
  }
  ++line_no;
  Benchmark bench;
  bool have_classes = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head == "classes") {
      int n = 0, void_id = 0;
      if (!(ss >> n >> void_id) || n <= 0) fail("malformed classes line");
      std::vector<std::string> names(n);
      for (auto& name : names) {
        if (!(ss >> name)) fail("missing class names");
      }
      bench.classes = ClassSet(std::move(names), void_id);
      bench.scene.num_classes = n;
      have_classes = true;
      continue;
    }
    std::string split, image, labels;
    if (!(ss >> split >> image >> labels)) fail("malformed scene line");
    Dataset* target = nullptr;
    if (head == "source" && split == "train") target = &bench.source_train;
    if (head == "source" && split == "val") target = &bench.source_val;
    if (head == "target" && split == "train") target = &bench.target_train;
    if (head == "target" && split == "val") target = &bench.target_val;
    if (!target) fail("unknown domain/split '" + head + " " + split + "'");
    target->images.push_back(io::LoadImage(base / image));
    target->labels.push_back(io::LoadLabelMap(base / labels));
    if (have_classes) target->labels.back().Validate(bench.classes);
  }
  if (!have_classes) fail("manifest has no classes line");
  return bench;
}

}  // namespace lsr
