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

#include "lsr/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "lsr/io.hpp"

namespace lsr {

namespace {

std::string Cell(const MaybeValue& v) { return v ? io::FormatReal(*v) : "-"; }

RunRow MakeRow(std::uint64_t seed, std::string variant, const RunResult& result) {
  RunRow row;
  row.seed = seed;
  row.variant = std::move(variant);
  row.miou = result.target_eval.miou;
  row.pixel_accuracy = result.target_eval.pixel_accuracy;
  row.masr = result.target_masr;
  row.best_step = result.best_step;
  row.diagnostics = result.diagnostics;
  return row;
}

bool Less(const MaybeValue& a, const MaybeValue& b) { return a && b && *a < *b; }

std::vector<VariantSummary> Summarize(const std::vector<RunRow>& rows) {
  std::vector<VariantSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const VariantSummary& s) { return s.variant == row.variant; });
    if (it == out.end()) {
      VariantSummary s;
      s.variant = row.variant;
      out.push_back(s);
    }
  }
  for (auto& s : out) {
    std::vector<double> miou;
    double masr_sum = 0.0;
    int masr_count = 0;
    for (const auto& row : rows) {
      if (row.variant != s.variant) continue;
      miou.push_back(row.miou);
      if (row.masr) {
        masr_sum += *row.masr;
        ++masr_count;
      }
      const Diagnostics& d = row.diagnostics;
      s.angle_increased += Less(d.angle_start, d.angle_end);
      s.entropy_decreased += Less(d.entropy_end, d.entropy_start);
      s.gap_shrunk += Less(d.gap_end, d.gap_start);
    }
    s.runs = static_cast<int>(miou.size());
    s.mean_miou = Mean(miou);
    if (miou.size() > 1) {
      double ss = 0.0;
      for (double v : miou) ss += (v - s.mean_miou) * (v - s.mean_miou);
      s.std_miou = std::sqrt(ss / static_cast<double>(miou.size() - 1));
    }
    if (masr_count > 0) s.mean_masr = masr_sum / masr_count;
  }
  return out;
}

ExperimentReport Run(const RunConfig& cfg, bool ablations) {
  ExperimentReport report;
  for (std::uint64_t seed : cfg.seeds) {
    TrainConfig train = cfg.train;
    train.seed = seed;
    const Benchmark bench =
        MakeBenchmark(cfg.scene, cfg.data.train_size, cfg.data.val_size, seed);
    const RunResult reference = RunRegime(Regime::kTargetSupervised, bench, train);
    const std::vector<MaybeValue> ref_iou = PresentIoU(reference.target_eval);
    RunResult ref_scored = reference;
    ref_scored.target_masr =
        Masr(ref_iou, ref_iou, std::nullopt, bench.classes.names()).masr;
    report.rows.push_back(MakeRow(seed, RegimeName(Regime::kTargetSupervised), ref_scored));
    report.rows.push_back(MakeRow(seed, RegimeName(Regime::kSourceOnly),
                                  RunRegime(Regime::kSourceOnly, bench, train, &ref_iou)));
    if (!ablations) {
      report.rows.push_back(MakeRow(seed, RegimeName(Regime::kAdapt),
                                    RunRegime(Regime::kAdapt, bench, train, &ref_iou)));
      continue;
    }
    for (const auto& variant : AblationVariants(cfg.train.weights)) {
      TrainConfig v = train;
      v.weights = variant.weights;
      const std::string name =
          variant.name == "full" ? RegimeName(Regime::kAdapt) : variant.name;
      report.rows.push_back(MakeRow(seed, name, RunRegime(Regime::kAdapt, bench, v, &ref_iou)));
    }
  }
  report.summary = Summarize(report.rows);
  return report;
}

}  // namespace

std::vector<AblationVariant> AblationVariants(const LossWeights& full) {
  std::vector<AblationVariant> out{{"full", full}};
  LossWeights w = full;
  w.lambda_c = 0.0;
  out.push_back({"no_c", w});
  w = full;
  w.lambda_p = 0.0;
  out.push_back({"no_p", w});
  w = full;
  w.lambda_n = 0.0;
  out.push_back({"no_n", w});
  w = full;
  w.lambda_em = 0.0;
  out.push_back({"no_em", w});
  return out;
}

const VariantSummary& ExperimentReport::Find(const std::string& variant) const {
  for (const auto& s : summary) {
    if (s.variant == variant) return s;
  }
  throw Error("no summary for variant '" + variant + "'");
}

ExperimentReport CompareRegimes(const RunConfig& cfg) { return Run(cfg, false); }

ExperimentReport RunAblation(const RunConfig& cfg) { return Run(cfg, true); }

SweepReport RunSweep(const RunConfig& cfg) {
  SweepReport report;
  for (std::uint64_t seed : cfg.sweep.seeds) {
    TrainConfig train = cfg.train;
    train.seed = seed;
    const Benchmark bench =
        MakeBenchmark(cfg.scene, cfg.data.train_size, cfg.data.val_size, seed);
    const RunResult reference = RunRegime(Regime::kTargetSupervised, bench, train);
    const std::vector<MaybeValue> ref_iou = PresentIoU(reference.target_eval);
    for (PerturbationFamily family : cfg.sweep.families) {
      for (int level : cfg.sweep.levels) {
        const Benchmark perturbed = PerturbTarget(bench, Perturbation{family, level}, seed);
        const RunResult run = RunRegime(Regime::kAdapt, perturbed, train, &ref_iou);
        report.rows.push_back(
            SweepRow{seed, family, level, run.target_eval.miou, run.target_masr});
      }
    }
  }
  for (PerturbationFamily family : cfg.sweep.families) {
    for (int level : cfg.sweep.levels) {
      SweepPoint point;
      point.family = family;
      point.level = level;
      std::vector<double> masr, miou;
      for (const auto& row : report.rows) {
        if (row.family != family || row.level != level) continue;
        miou.push_back(row.miou);
        if (row.masr) masr.push_back(*row.masr);
      }
      point.mean_miou = Mean(miou);
      if (!masr.empty()) {
        point.mean_masr = Mean(masr);
        if (masr.size() > 1) {
          double ss = 0.0;
          for (double v : masr) ss += (v - *point.mean_masr) * (v - *point.mean_masr);
          point.std_masr = std::sqrt(ss / static_cast<double>(masr.size() - 1));
        }
      }
      report.points.push_back(point);
    }
  }
  return report;
}

MonotoneCheck CheckNonIncreasing(std::span<const double> values) {
  MonotoneCheck out;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double rise = values[i] - values[i - 1];
    if (rise > 0.0) {
      ++out.inversions;
      out.max_rise = std::max(out.max_rise, rise);
    }
  }
  return out;
}

void WriteRunRowsCsv(std::ostream& os, std::span<const RunRow> rows) {
  os << "seed,variant,miou,pixel_accuracy,masr,best_step,angle_start,angle_end,"
        "entropy_start,entropy_end,gap_start,gap_end\n";
  for (const auto& r : rows) {
    const Diagnostics& d = r.diagnostics;
    os << r.seed << ',' << r.variant << ',' << io::FormatReal(r.miou) << ','
       << io::FormatReal(r.pixel_accuracy) << ',' << Cell(r.masr) << ',' << r.best_step << ','
       << Cell(d.angle_start) << ',' << Cell(d.angle_end) << ',' << Cell(d.entropy_start)
       << ',' << Cell(d.entropy_end) << ',' << Cell(d.gap_start) << ',' << Cell(d.gap_end)
       << '\n';
  }
}

void WriteSummaryCsv(std::ostream& os, std::span<const VariantSummary> summary) {
  os << "variant,runs,mean_miou,std_miou,mean_masr,angle_increased,entropy_decreased,"
        "gap_shrunk\n";
  for (const auto& s : summary) {
    os << s.variant << ',' << s.runs << ',' << io::FormatReal(s.mean_miou) << ','
       << io::FormatReal(s.std_miou) << ',' << Cell(s.mean_masr) << ',' << s.angle_increased
       << ',' << s.entropy_decreased << ',' << s.gap_shrunk << '\n';
  }
}

void WriteSweepRowsCsv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "seed,family,level,miou,masr\n";
  for (const auto& r : rows) {
    os << r.seed << ',' << PerturbationName(r.family) << ',' << r.level << ','
       << io::FormatReal(r.miou) << ',' << Cell(r.masr) << '\n';
  }
}

void WriteSweepPointsCsv(std::ostream& os, std::span<const SweepPoint> points) {
  os << "family,level,mean_miou,mean_masr,std_masr\n";
  for (const auto& p : points) {
    os << PerturbationName(p.family) << ',' << p.level << ',' << io::FormatReal(p.mean_miou)
       << ',' << Cell(p.mean_masr) << ',' << io::FormatReal(p.std_masr) << '\n';
  }
}

}  // namespace lsr
