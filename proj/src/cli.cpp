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

#include "lsr/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lsr/config.hpp"
#include "lsr/embed.hpp"
#include "lsr/experiments.hpp"
#include "lsr/gradsuite.hpp"
#include "lsr/io.hpp"
#include "lsr/metrics.hpp"

namespace fs = std::filesystem;

namespace lsr {

namespace {

// Thrown for problems the user can fix on the command line; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void AddCommon(CLI::App* cmd, CommonOptions& opts, bool needs_out) {
  cmd->add_option("--config", opts.config, "RunConfig file (key = value lines)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.sets, "Override one config key, key=value; repeatable");
  cmd->add_option("--seed", opts.seed, "Same as --set seed=N");
  auto* out = cmd->add_option("--out", opts.out, "Run directory for all outputs");
  if (needs_out) out->required();
}

RunConfig ResolveConfig(const CommonOptions& opts) {
  try {
    RunConfig cfg = opts.config.empty() ? DefaultRunConfig() : LoadRunConfig(opts.config);
    std::vector<std::string> sets = opts.sets;
    if (opts.seed) sets.push_back("seed=" + std::to_string(*opts.seed));
    ApplyOverrides(cfg, sets);
    return cfg;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

// Creates the run directory and archives the effective config in it.
fs::path PrepareRunDir(const std::string& out, const RunConfig& cfg) {
  const fs::path dir(out);
  fs::create_directories(dir);
  io::WriteTextFile(dir / "config.txt", FormatRunConfig(cfg));
  return dir;
}

template <typename Fn>
void WriteFile(const fs::path& path, Fn&& fn) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  fn(os);
  if (!os) throw Error("write failed: " + path.string());
}

Benchmark BenchmarkFor(const RunConfig& cfg, const std::string& data) {
  if (!data.empty()) return LoadBenchmark(data);
  return MakeBenchmark(cfg.scene, cfg.data.train_size, cfg.data.val_size, cfg.train.seed);
}

std::vector<MaybeValue> LoadIoU(const std::string& path, std::vector<std::string>* names) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return ReadIoUColumn(is, names);
}

std::vector<int> ParseIdList(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      ids.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad class id '" + item + "' in --restrict");
    }
  }
  if (ids.empty()) throw UsageError("--restrict needs at least one class id");
  return ids;
}

std::string Fixed(const MaybeValue& v, int digits) {
  return v ? fmt::format("{:.{}f}", *v, digits) : std::string("-");
}

// A label file, or every *.lbl file of a directory in name order.
std::vector<fs::path> LabelFiles(const std::string& path) {
  if (!fs::is_directory(path)) return {fs::path(path)};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".lbl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .lbl files in " + path);
  return files;
}

void PrintReport(std::ostream& out, const ClassReport& report) {
  for (std::size_t c = 0; c < report.iou.size(); ++c) {
    out << fmt::format("  {:<12} iou {:>7}  asr {:>7}\n", report.names[c],
                       Fixed(report.iou[c], 4), Fixed(report.asr[c], 1));
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
}

int Gen(const CommonOptions& opts, std::ostream& out) {
  const RunConfig cfg = ResolveConfig(opts);
  const fs::path dir = PrepareRunDir(opts.out, cfg);
  const Benchmark bench =
      MakeBenchmark(cfg.scene, cfg.data.train_size, cfg.data.val_size, cfg.train.seed);
  SaveBenchmark(dir / "data", bench);
  out << "wrote " << (dir / "data" / "manifest.txt").string() << '\n';
  return kExitOk;
}

int Train(const CommonOptions& opts, const std::string& regime_name, const std::string& data,
          const std::string& reference, std::ostream& out) {
  const RunConfig cfg = ResolveConfig(opts);
  Regime regime;
  try {
    regime = ParseRegime(regime_name);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const fs::path dir = PrepareRunDir(opts.out, cfg);
  const Benchmark bench = BenchmarkFor(cfg, data);
  std::optional<std::vector<MaybeValue>> ref;
  if (!reference.empty()) ref = LoadIoU(reference, nullptr);
  const RunResult result = RunRegime(regime, bench, cfg.train, ref ? &*ref : nullptr);

  WriteFile(dir / "metrics.csv", [&](std::ostream& os) { WriteMetricsCsv(os, result.history); });
  SaveCheckpoint(dir / "final.ckpt", Checkpoint{result.final_net, cfg.train.optim.total_steps,
                                                cfg.train.seed});
  SaveCheckpoint(dir / "best.ckpt", Checkpoint{result.best_net, result.best_step, cfg.train.seed});
  const std::vector<MaybeValue> iou = PresentIoU(result.target_eval);
  const ClassReport report =
      Masr(iou, ref ? *ref : iou, std::nullopt, bench.classes.names());
  WriteFile(dir / "eval.csv", [&](std::ostream& os) { WriteClassReportCsv(os, report); });
  WriteFile(dir / "diagnostics.csv", [&](std::ostream& os) {
    const Diagnostics& d = result.diagnostics;
    os << "quantity,start,end\n";
    os << "inter_prototype_angle," << Fixed(d.angle_start, 6) << ',' << Fixed(d.angle_end, 6)
       << '\n';
    os << "channel_entropy," << Fixed(d.entropy_start, 6) << ',' << Fixed(d.entropy_end, 6)
       << '\n';
    os << "norm_gap," << Fixed(d.gap_start, 6) << ',' << Fixed(d.gap_end, 6) << '\n';
  });
  out << fmt::format("{} best_step {} target mIoU {:.4f}", RegimeName(regime), result.best_step,
                     result.target_eval.miou);
  if (ref) out << " mASR " << Fixed(report.masr, 1);
  out << '\n';
  return kExitOk;
}

int Eval(const CommonOptions& opts, const std::string& pred, const std::string& gt,
         const std::string& checkpoint, const std::string& data, const std::string& supervised,
         std::ostream& out) {
  const RunConfig cfg = ResolveConfig(opts);
  if (checkpoint.empty() == pred.empty()) {
    throw UsageError("eval needs either --pred/--gt or --checkpoint");
  }
  if (!pred.empty() && gt.empty()) throw UsageError("--pred needs --gt");
  IoUResult result;
  ClassSet classes;
  if (!checkpoint.empty()) {
    const Benchmark bench = BenchmarkFor(cfg, data);
    classes = bench.classes;
    result = EvaluateNet(LoadCheckpoint(checkpoint).net, bench.target_val, classes);
  } else {
    classes = ClassSet::Numbered(cfg.scene.num_classes, kVoidLabel);
    const auto pred_files = LabelFiles(pred);
    const auto gt_files = LabelFiles(gt);
    if (pred_files.size() != gt_files.size()) {
      throw Error(fmt::format("{} predictions vs {} ground-truth maps", pred_files.size(),
                              gt_files.size()));
    }
    ConfusionMatrix cm(classes.size());
    for (std::size_t i = 0; i < pred_files.size(); ++i) {
      const LabelMap p = io::LoadLabelMap(pred_files[i]);
      const LabelMap g = io::LoadLabelMap(gt_files[i]);
      p.Validate(classes);
      g.Validate(classes);
      cm.Add(p, g);
    }
    result = IoUFromConfusion(cm);
  }
  const std::vector<MaybeValue> iou = PresentIoU(result);
  std::optional<std::vector<MaybeValue>> sup;
  if (!supervised.empty()) sup = LoadIoU(supervised, nullptr);
  const ClassReport report = Masr(iou, sup ? *sup : iou, std::nullopt, classes.names());
  if (!opts.out.empty()) {
    const fs::path dir = PrepareRunDir(opts.out, cfg);
    WriteFile(dir / "eval.csv", [&](std::ostream& os) { WriteClassReportCsv(os, report); });
  }
  PrintReport(out, report);
  out << fmt::format("mIoU {:.4f}\npixel_accuracy {:.4f}\n", result.miou,
                     result.pixel_accuracy);
  if (sup) out << "mASR " << Fixed(report.masr, 1) << '\n';
  return kExitOk;
}

int MasrCommand(const CommonOptions& opts, const std::string& adapted,
                const std::string& supervised, const std::string& restrict, std::ostream& out) {
  std::vector<std::string> names;
  const std::vector<MaybeValue> a = LoadIoU(adapted, &names);
  const std::vector<MaybeValue> s = LoadIoU(supervised, nullptr);
  std::optional<std::vector<int>> subset;
  if (!restrict.empty()) subset = ParseIdList(restrict);
  const ClassReport report = Masr(a, s, subset, names);
  if (!opts.out.empty()) {
    const fs::path dir = PrepareRunDir(opts.out, ResolveConfig(opts));
    WriteFile(dir / "masr.csv", [&](std::ostream& os) { WriteClassReportCsv(os, report); });
  }
  PrintReport(out, report);
  out << "mASR " << Fixed(report.masr, 1) << '\n';
  if (subset) out << "mASR_restricted " << Fixed(report.masr_restricted, 1) << '\n';
  return kExitOk;
}

int Sweep(const CommonOptions& opts, std::ostream& out) {
  const RunConfig cfg = ResolveConfig(opts);
  const fs::path dir = PrepareRunDir(opts.out, cfg);
  const SweepReport report = RunSweep(cfg);
  WriteFile(dir / "sweep_runs.csv", [&](std::ostream& os) { WriteSweepRowsCsv(os, report.rows); });
  WriteFile(dir / "sweep_points.csv",
            [&](std::ostream& os) { WriteSweepPointsCsv(os, report.points); });
  for (const auto& p : report.points) {
    out << fmt::format("{:<15} level {}  mASR {:>6}  mIoU {:.4f}\n", PerturbationName(p.family),
                       p.level, Fixed(p.mean_masr, 1), p.mean_miou);
  }
  return kExitOk;
}

int GradCheck(const CommonOptions& opts, const std::string& loss, GradSuiteOptions suite,
              std::ostream& out) {
  const RunConfig cfg = ResolveConfig(opts);
  suite.seed = cfg.train.seed;
  std::vector<GradCheckReport> reports;
  if (loss == "all") {
    reports = RunAllGradChecks(suite);
  } else {
    const auto& names = GradCheckNames();
    if (std::find(names.begin(), names.end(), loss) == names.end()) {
      throw UsageError("unknown loss '" + loss + "'");
    }
    reports.push_back(RunGradCheck(loss, suite));
  }
  bool pass = true;
  for (const auto& r : reports) {
    pass = pass && r.pass;
    out << fmt::format("{:<6} instances {:>4}  max_rel {:.3e}  mean_rel {:.3e}  {}\n",
                       r.loss_name, r.instances, r.max_rel_error, r.mean_rel_error,
                       r.pass ? "PASS" : "FAIL");
  }
  if (!opts.out.empty()) {
    const fs::path dir = PrepareRunDir(opts.out, cfg);
    WriteFile(dir / "gradcheck.csv", [&](std::ostream& os) {
      os << "loss,instances,coordinates,max_rel_error,mean_rel_error,tolerance,pass\n";
      for (const auto& r : reports) {
        os << r.loss_name << ',' << r.instances << ',' << r.coordinates << ','
           << io::FormatReal(r.max_rel_error) << ',' << io::FormatReal(r.mean_rel_error) << ','
           << io::FormatReal(r.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
      }
    });
  }
  return pass ? kExitOk : kExitRuntime;
}

int Embed(const CommonOptions& opts, const std::string& checkpoint, const std::string& data,
          std::ostream& out) {
  const RunConfig cfg = ResolveConfig(opts);
  const fs::path dir = PrepareRunDir(opts.out, cfg);
  const Benchmark bench = BenchmarkFor(cfg, data);
  const Checkpoint ckpt = LoadCheckpoint(checkpoint);
  const std::vector<EmbedSample> samples = SampleEmbedding(
      ckpt.net, bench, cfg.train.peak_ratio, cfg.embed_per_class, cfg.train.seed);
  if (samples.size() < 2) throw Error("too few labelled latent vectors to embed");
  Vec rows;
  for (const auto& s : samples) rows.insert(rows.end(), s.feature.begin(), s.feature.end());
  const Pca pca = FitPca(rows, ckpt.net.shape().features, 3);
  WriteFile(dir / "embedding.csv",
            [&](std::ostream& os) { WriteEmbeddingCsv(os, samples, bench.classes, pca); });
  WriteFile(dir / "pca.csv", [&](std::ostream& os) { WritePcaCsv(os, pca); });
  out << fmt::format("{} vectors, {} components, orthonormality error {:.2e}\n", samples.size(),
                     pca.components, OrthonormalityError(pca));
  return kExitOk;
}

int Ablate(const CommonOptions& opts, std::ostream& out) {
  const RunConfig cfg = ResolveConfig(opts);
  const fs::path dir = PrepareRunDir(opts.out, cfg);
  const ExperimentReport report = RunAblation(cfg);
  WriteFile(dir / "runs.csv", [&](std::ostream& os) { WriteRunRowsCsv(os, report.rows); });
  WriteFile(dir / "summary.csv", [&](std::ostream& os) { WriteSummaryCsv(os, report.summary); });
  for (const auto& s : report.summary) {
    out << fmt::format("{:<18} mIoU {:.4f} +- {:.4f}  mASR {:>6}\n", s.variant, s.mean_miou,
                       s.std_miou, Fixed(s.mean_masr, 1));
  }
  return kExitOk;
}

int ConfigCommand(const CommonOptions& opts, bool keys, std::ostream& out) {
  if (keys) {
    for (const auto& k : ConfigKeys()) out << fmt::format("{:<24} {}\n", k.key, k.description);
    return kExitOk;
  }
  out << FormatRunConfig(ResolveConfig(opts));
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent-space regularization for segmentation domain adaptation, desk scale",
               "lsr"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* gen = app.add_subcommand("gen", "Generate the synthetic source/target benchmark");
  AddCommon(gen, common, true);

  std::string regime, data, reference;
  auto* train = app.add_subcommand("train", "Train one regime");
  AddCommon(train, common, true);
  train->add_option("--regime", regime, "target | source | adapt (or the long names)")
      ->required();
  train->add_option("--data", data, "Benchmark manifest; generated from the config if absent")
      ->check(CLI::ExistingFile);
  train->add_option("--reference", reference,
                    "Per-class IoU CSV of a target-supervised run, for mASR")
      ->check(CLI::ExistingFile);

  std::string pred, gt, checkpoint, supervised;
  auto* eval = app.add_subcommand("eval", "Per-class IoU of predictions or of a checkpoint");
  AddCommon(eval, common, false);
  eval->add_option("--pred", pred, "Predicted label map, or a directory of .lbl files")
      ->check(CLI::ExistingPath);
  eval->add_option("--gt", gt, "Ground-truth label map, or a directory of .lbl files")
      ->check(CLI::ExistingPath);
  eval->add_option("--checkpoint", checkpoint, "Evaluate this network on target validation")
      ->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Benchmark manifest for --checkpoint")
      ->check(CLI::ExistingFile);
  eval->add_option("--supervised", supervised, "Reference IoU CSV, adds the ASR column")
      ->check(CLI::ExistingFile);

  std::string adapted, restrict;
  auto* masr = app.add_subcommand("masr", "mASR of two per-class IoU CSVs");
  AddCommon(masr, common, false);
  masr->add_option("--adapted", adapted, "CSV with class_id and iou columns")
      ->required()
      ->check(CLI::ExistingFile);
  masr->add_option("--supervised", supervised, "Target-supervised CSV, same layout")
      ->required()
      ->check(CLI::ExistingFile);
  masr->add_option("--restrict", restrict, "Comma-separated class ids for restricted means");

  auto* sweep = app.add_subcommand("sweep", "Perturbation sweep: mASR against intensity");
  AddCommon(sweep, common, true);

  std::string loss = "all";
  GradSuiteOptions suite;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  AddCommon(gradcheck, common, false);
  gradcheck->add_option("--loss", loss, "ce | clust | perp | norm | em | e2e | all")
      ->capture_default_str();
  gradcheck->add_option("--instances", suite.instances, "Random instances per loss")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--step", suite.h, "Central-difference step h")->capture_default_str();
  gradcheck->add_option("--tol", suite.tol, "Relative error tolerance")->capture_default_str();

  auto* embed = app.add_subcommand("embed", "Export latent samples and a 3-D PCA projection");
  AddCommon(embed, common, true);
  embed->add_option("--checkpoint", checkpoint, "Trained network")
      ->required()
      ->check(CLI::ExistingFile);
  embed->add_option("--data", data, "Benchmark manifest; generated from the config if absent")
      ->check(CLI::ExistingFile);

  auto* ablate = app.add_subcommand("ablate", "Loss on/off grid over the config seeds");
  AddCommon(ablate, common, true);

  bool keys = false;
  auto* config = app.add_subcommand("config", "Print the effective config");
  AddCommon(config, common, false);
  config->add_flag("--keys", keys, "List every key with its description");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return Gen(common, out);
    if (train->parsed()) return Train(common, regime, data, reference, out);
    if (eval->parsed()) return Eval(common, pred, gt, checkpoint, data, supervised, out);
    if (masr->parsed()) return MasrCommand(common, adapted, supervised, restrict, out);
    if (sweep->parsed()) return Sweep(common, out);
    if (gradcheck->parsed()) return GradCheck(common, loss, suite, out);
    if (embed->parsed()) return Embed(common, checkpoint, data, out);
    if (ablate->parsed()) return Ablate(common, out);
    if (config->parsed()) return ConfigCommand(common, keys, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto* s : app.get_subcommands()) err << '\n' << s->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace lsr
