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

#ifndef LSR_CONFIG_HPP_
#define LSR_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lsr/synth.hpp"
#include "lsr/trainer.hpp"

namespace lsr {

struct DataConfig {
  int train_size = 64;
  int val_size = 16;
};

struct SweepConfig {
  std::vector<PerturbationFamily> families{kAllPerturbations.begin(), kAllPerturbations.end()};
  std::vector<int> levels{1, 2, 3, 4, 5};
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

// Every tunable of the command-line tool. `seed` drives both data
// generation and training; multi-seed experiments override it per run.
struct RunConfig {
  SceneConfig scene = SceneConfig::Default();
  DataConfig data;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  SweepConfig sweep;
  int embed_per_class = 250;

  // Copies scene.num_classes into the network shape and validates all parts.
  void Finalize();
};

RunConfig DefaultRunConfig();

// Line-based "key = value"; '#' starts a comment. Unknown or repeated keys
// and malformed values are errors naming the line.
RunConfig ParseRunConfig(std::istream& is, const std::string& source_name = "<config>");
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Applies "key=value" overrides in order, then validates once.
void ApplyOverrides(RunConfig& cfg, const std::vector<std::string>& assignments);

// Every key with its current value, in a fixed order; parses back to the
// same config.
std::string FormatRunConfig(const RunConfig& cfg);

struct ConfigKeyDoc {
  std::string key;
  std::string description;
};
std::vector<ConfigKeyDoc> ConfigKeys();

}  // namespace lsr

#endif  // LSR_CONFIG_HPP_
