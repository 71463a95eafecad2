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

#include "lsr/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "lsr/io.hpp"

namespace lsr {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(Trim(item));
  return out;
}

template <typename T>
T ParseNumber(const std::string& text) {
  T value{};
  const std::string t = Trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw Error("'" + text + "' is not a valid number");
  }
  return value;
}

bool ParseBool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error("'" + text + "' is not a boolean (true/false)");
}

template <typename T>
std::vector<T> ParseList(const std::string& text) {
  std::vector<T> out;
  for (const auto& item : Split(text, ',')) out.push_back(ParseNumber<T>(item));
  if (out.empty()) throw Error("empty list");
  return out;
}

Color ParseColor(const std::string& text) {
  std::istringstream ss(text);
  Color c{};
  std::string a, b, d, extra;
  if (!(ss >> a >> b >> d) || (ss >> extra)) {
    throw Error("'" + text + "' is not a colour triple");
  }
  c[0] = ParseNumber<double>(a);
  c[1] = ParseNumber<double>(b);
  c[2] = ParseNumber<double>(d);
  return c;
}

std::string FormatColor(const Color& c) {
  return io::FormatReal(c[0]) + ' ' + io::FormatReal(c[1]) + ' ' + io::FormatReal(c[2]);
}

template <typename T, typename F>
std::string Join(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += format(items[i]);
  }
  return out;
}

std::string Real(double x) { return io::FormatReal(x); }
template <typename T>
std::string Int(T x) {
  return std::to_string(x);
}
std::string Bool(bool b) { return b ? "true" : "false"; }

struct Binding {
  std::string key;
  std::string doc;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

#define LSR_REAL(KEY, FIELD, DOC)                                                      \
  Binding {                                                                           \
    KEY, DOC, [](RunConfig& c, const std::string& v) { c.FIELD = ParseNumber<double>(v); }, \
        [](const RunConfig& c) { return Real(c.FIELD); }                              \
  }
#define LSR_INT(KEY, TYPE, FIELD, DOC)                                                \
  Binding {                                                                          \
    KEY, DOC, [](RunConfig& c, const std::string& v) { c.FIELD = ParseNumber<TYPE>(v); }, \
        [](const RunConfig& c) { return Int(c.FIELD); }                              \
  }
#define LSR_BOOL(KEY, FIELD, DOC)                                                        \
  Binding {                                                                             \
    KEY, DOC, [](RunConfig& c, const std::string& v) { c.FIELD = ParseBool(v); },        \
        [](const RunConfig& c) { return Bool(c.FIELD); }                                \
  }

const std::vector<Binding>& Bindings() {
  static const std::vector<Binding> bindings = {
      LSR_INT("seed", std::uint64_t, train.seed, "data and training seed of single runs"),
      Binding{"seeds", "seeds of multi-seed experiments (compare, ablate)",
              [](RunConfig& c, const std::string& v) { c.seeds = ParseList<std::uint64_t>(v); },
              [](const RunConfig& c) { return Join(c.seeds, Int<std::uint64_t>); }},
      LSR_INT("scene.height", int, scene.height, "scene height in pixels"),
      LSR_INT("scene.width", int, scene.width, "scene width in pixels"),
      LSR_INT("scene.num_classes", int, scene.num_classes, "number of classes, background included"),
      LSR_INT("scene.blobs_min", int, scene.blobs_min, "fewest blobs per scene"),
      LSR_INT("scene.blobs_max", int, scene.blobs_max, "most blobs per scene"),
      LSR_INT("scene.axis_min", int, scene.axis_min, "smallest blob half-axis"),
      LSR_INT("scene.axis_max", int, scene.axis_max, "largest blob half-axis"),
      Binding{"scene.colors", "per-class mean colour, 'r g b' triples separated by commas",
              [](RunConfig& c, const std::string& v) {
                c.scene.class_colors.clear();
                for (const auto& item : Split(v, ',')) c.scene.class_colors.push_back(ParseColor(item));
              },
              [](const RunConfig& c) { return Join(c.scene.class_colors, FormatColor); }},
      Binding{"scene.sigma", "per-class texture noise standard deviation",
              [](RunConfig& c, const std::string& v) { c.scene.class_sigma = ParseList<double>(v); },
              [](const RunConfig& c) { return Join(c.scene.class_sigma, Real); }},
      Binding{"scene.blob_probs", "probability of each foreground class per blob",
              [](RunConfig& c, const std::string& v) {
                c.scene.blob_class_probs = ParseList<double>(v);
              },
              [](const RunConfig& c) { return Join(c.scene.blob_class_probs, Real); }},
      Binding{"shift.offset", "target colour offset 'r g b'",
              [](RunConfig& c, const std::string& v) { c.scene.shift.color_offset = ParseColor(v); },
              [](const RunConfig& c) { return FormatColor(c.scene.shift.color_offset); }},
      LSR_REAL("shift.jitter", scene.shift.class_jitter, "per-class offset jitter half-width"),
      LSR_REAL("shift.noise_multiplier", scene.shift.noise_multiplier,
               "target texture noise relative to source"),
      LSR_INT("data.train_size", int, data.train_size, "scenes per training split"),
      LSR_INT("data.val_size", int, data.val_size, "scenes per validation split"),
      LSR_INT("net.window", int, train.net.window, "latent window side in pixels"),
      LSR_INT("net.hidden", int, train.net.hidden, "encoder hidden width"),
      LSR_INT("net.features", int, train.net.features, "latent channels K"),
      LSR_REAL("optim.base_lr", train.optim.base_lr, "initial learning rate"),
      LSR_REAL("optim.momentum", train.optim.momentum, "SGD momentum"),
      LSR_REAL("optim.weight_decay", train.optim.weight_decay, "L2 weight decay"),
      LSR_REAL("optim.poly_power", train.optim.poly_power, "polynomial decay power"),
      LSR_INT("optim.total_steps", long, train.optim.total_steps, "optimisation steps"),
      LSR_REAL("loss.lambda_c", train.weights.lambda_c, "clustering weight"),
      LSR_REAL("loss.lambda_p", train.weights.lambda_p, "perpendicularity weight"),
      LSR_REAL("loss.lambda_n", train.weights.lambda_n, "norm alignment weight"),
      LSR_REAL("loss.lambda_em", train.weights.lambda_em, "entropy minimisation weight"),
      LSR_REAL("loss.delta_f", train.weights.delta_f, "norm target increment"),
      LSR_REAL("proto.eta", train.eta, "prototype smoothing factor"),
      LSR_REAL("decimation.peak_ratio", train.peak_ratio, "histogram peak ratio T_h"),
      LSR_REAL("pseudo.threshold", train.pseudo.threshold, "two-pass confidence threshold"),
      Binding{"train.target_center", "target clustering centre: target_centroid or source_prototype",
              [](RunConfig& c, const std::string& v) {
                c.train.target_center = ParseTargetCenter(v);
              },
              [](const RunConfig& c) { return TargetCenterName(c.train.target_center); }},
      LSR_BOOL("train.weighted_ce", train.weighted_ce, "inverse-frequency class weights in CE"),
      LSR_INT("train.warmup_steps", long, train.warmup_steps, "source-only steps before adaptation"),
      LSR_INT("train.eval_every", long, train.eval_every, "steps between evaluation points"),
      LSR_INT("train.diag_images", int, train.diag_images, "validation images for diagnostics"),
      LSR_BOOL("train.early_stopping", train.early_stopping, "keep the best-scoring checkpoint"),
      Binding{"sweep.families", "perturbation families of the sweep",
              [](RunConfig& c, const std::string& v) {
                c.sweep.families.clear();
                for (const auto& item : Split(v, ',')) c.sweep.families.push_back(ParsePerturbation(item));
                if (c.sweep.families.empty()) throw Error("empty list");
              },
              [](const RunConfig& c) { return Join(c.sweep.families, PerturbationName); }},
      Binding{"sweep.levels", "perturbation levels of the sweep",
              [](RunConfig& c, const std::string& v) { c.sweep.levels = ParseList<int>(v); },
              [](const RunConfig& c) { return Join(c.sweep.levels, Int<int>); }},
      Binding{"sweep.seeds", "seeds of the sweep",
              [](RunConfig& c, const std::string& v) {
                c.sweep.seeds = ParseList<std::uint64_t>(v);
              },
              [](const RunConfig& c) { return Join(c.sweep.seeds, Int<std::uint64_t>); }},
      LSR_INT("embed.per_class", int, embed_per_class, "vectors sampled per class by embed"),
  };
  return bindings;
}

#undef LSR_REAL
#undef LSR_INT
#undef LSR_BOOL

const Binding& FindBinding(const std::string& key) {
  for (const auto& b : Bindings()) {
    if (b.key == key) return b;
  }
  throw Error("unknown key '" + key + "'");
}

}  // namespace

void RunConfig::Finalize() {
  train.net.classes = scene.num_classes;
  scene.Validate();
  train.Validate();
  if (data.train_size <= 0 || data.val_size <= 0) throw Error("split sizes must be positive");
  if (scene.height % train.net.window != 0 || scene.width % train.net.window != 0) {
    throw Error("scene size is not divisible by net.window");
  }
  if (seeds.empty()) throw Error("seeds must not be empty");
  for (int level : sweep.levels) {
    if (level < 1 || level > 5) throw Error("sweep levels must lie in 1..5");
  }
  if (embed_per_class <= 0) throw Error("embed.per_class must be positive");
}

RunConfig DefaultRunConfig() {
  RunConfig cfg;
  // Desk-scale step size; OptimConfig keeps the larger-model default.
  cfg.train.optim.base_lr = 0.02;
  cfg.Finalize();
  return cfg;
}

RunConfig ParseRunConfig(std::istream& is, const std::string& source_name) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto where = source_name + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(where + "expected 'key = value'");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    try {
      const Binding& b = FindBinding(key);
      if (!seen.insert(key).second) throw Error("key '" + key + "' given twice");
      b.parse(cfg, value);
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
  }
  try {
    cfg.Finalize();
  } catch (const Error& e) {
    throw Error(source_name + ": " + e.what());
  }
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::istringstream is(io::ReadTextFile(path));
  return ParseRunConfig(is, path.string());
}

void ApplyOverrides(RunConfig& cfg, const std::vector<std::string>& assignments) {
  for (const auto& assignment : assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw Error("override '" + assignment + "' is not key=value");
    try {
      FindBinding(Trim(assignment.substr(0, eq))).parse(cfg, Trim(assignment.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error("override '" + assignment + "': " + e.what());
    }
  }
  cfg.Finalize();
}

std::string FormatRunConfig(const RunConfig& cfg) {
  std::string out;
  for (const auto& b : Bindings()) out += b.key + " = " + b.format(cfg) + "\n";
  return out;
}

std::vector<ConfigKeyDoc> ConfigKeys() {
  std::vector<ConfigKeyDoc> out;
  for (const auto& b : Bindings()) out.push_back({b.key, b.doc});
  return out;
}

}  // namespace lsr
