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

#include "lsr/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "lsr/io.hpp"

namespace lsr {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : n_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * (num_classes + 1), 0) {}

void ConfusionMatrix::Add(const LabelMap& pred, const LabelMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw Error("prediction " + std::to_string(pred.height()) + "x" +
                std::to_string(pred.width()) + " vs ground truth " +
                std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = gt.data()[i];
    if (g < 0 || g >= n_) continue;
    int p = pred.data()[i];
    if (p < 0 || p >= n_) p = n_;
    ++counts_[static_cast<std::size_t>(g) * (n_ + 1) + p];
  }
}

IoUResult IoUFromConfusion(const ConfusionMatrix& cm) {
  const int n = cm.num_classes();
  IoUResult out;
  out.iou.assign(n, 0.0);
  out.present.assign(n, false);
  long long correct = 0, total = 0;
  for (int c = 0; c < n; ++c) {
    const long long tp = cm.at(c, c);
    long long fn = cm.at(c, n), fp = 0;
    for (int j = 0; j < n; ++j) {
      total += cm.at(c, j);
      if (j == c) continue;
      fn += cm.at(c, j);
      fp += cm.at(j, c);
    }
    total += cm.at(c, n);
    correct += tp;
    const long long uni = tp + fp + fn;
    if (uni > 0) {
      out.present[c] = true;
      out.iou[c] = static_cast<double>(tp) / static_cast<double>(uni);
    }
  }
  double sum = 0.0;
  int count = 0;
  for (int c = 0; c < n; ++c) {
    if (out.present[c]) {
      sum += out.iou[c];
      ++count;
    }
  }
  out.miou = count > 0 ? sum / count : 0.0;
  out.pixel_accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
  return out;
}

IoUResult ConfusionAndIoU(const LabelMap& pred, const LabelMap& gt, const ClassSet& classes) {
  ConfusionMatrix cm(classes.size());
  cm.Add(pred, gt);
  return IoUFromConfusion(cm);
}

std::vector<MaybeValue> PresentIoU(const IoUResult& result) {
  std::vector<MaybeValue> out(result.iou.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (result.present[c]) out[c] = result.iou[c];
  }
  return out;
}

namespace {

MaybeValue MeanOver(std::span<const MaybeValue> values, const std::vector<int>* subset) {
  double sum = 0.0;
  int count = 0;
  auto visit = [&](int c) {
    if (c >= 0 && static_cast<std::size_t>(c) < values.size() && values[c]) {
      sum += *values[c];
      ++count;
    }
  };
  if (subset) {
    for (int c : *subset) visit(c);
  } else {
    for (std::size_t c = 0; c < values.size(); ++c) visit(static_cast<int>(c));
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::string Cell(const MaybeValue& v) { return v ? io::FormatReal(*v) : "-"; }

}  // namespace

ClassReport Masr(std::span<const MaybeValue> adapted, std::span<const MaybeValue> supervised,
                 std::optional<std::vector<int>> restrict_to, std::vector<std::string> names) {
  if (adapted.size() != supervised.size()) {
    throw Error("mASR: " + std::to_string(adapted.size()) + " adapted vs " +
                std::to_string(supervised.size()) + " supervised classes");
  }
  const std::size_t n = adapted.size();
  ClassReport report;
  report.names = std::move(names);
  if (report.names.empty()) {
    for (std::size_t c = 0; c < n; ++c) report.names.push_back("c" + std::to_string(c));
  }
  if (report.names.size() != n) throw Error("mASR: wrong number of class names");
  report.iou.assign(adapted.begin(), adapted.end());
  report.iou_supervised.assign(supervised.begin(), supervised.end());
  report.asr.assign(n, std::nullopt);
  for (std::size_t c = 0; c < n; ++c) {
    if (!adapted[c]) continue;
    if (!supervised[c] || *supervised[c] == 0.0) {
      report.warnings.push_back("class " + report.names[c] +
                                ": supervised IoU is zero or missing, ratio undefined");
      continue;
    }
    report.asr[c] = *adapted[c] / *supervised[c] * 100.0;
  }
  report.miou = MeanOver(report.iou, nullptr);
  report.masr = MeanOver(report.asr, nullptr);
  if (restrict_to) {
    for (int c : *restrict_to) {
      if (c < 0 || static_cast<std::size_t>(c) >= n) {
        throw Error("restricted class id " + std::to_string(c) + " out of range");
      }
    }
    report.restricted = *restrict_to;
    report.miou_restricted = MeanOver(report.iou, &report.restricted);
    report.masr_restricted = MeanOver(report.asr, &report.restricted);
  }
  return report;
}

void WriteClassReportCsv(std::ostream& os, const ClassReport& report) {
  os << "class_id,name,iou,iou_supervised,asr\n";
  for (std::size_t c = 0; c < report.iou.size(); ++c) {
    os << c << ',' << report.names[c] << ',' << Cell(report.iou[c]) << ','
       << Cell(report.iou_supervised[c]) << ',' << Cell(report.asr[c]) << '\n';
  }
  os << "mean,all," << Cell(report.miou) << ','
     << Cell(MeanOver(report.iou_supervised, nullptr)) << ',' << Cell(report.masr) << '\n';
  if (!report.restricted.empty()) {
    os << "mean_restricted,";
    for (std::size_t i = 0; i < report.restricted.size(); ++i) {
      if (i) os << ' ';
      os << report.restricted[i];
    }
    os << ',' << Cell(report.miou_restricted) << ','
       << Cell(MeanOver(report.iou_supervised, &report.restricted)) << ','
       << Cell(report.masr_restricted) << '\n';
  }
}

std::vector<MaybeValue> ReadIoUColumn(std::istream& is, std::vector<std::string>* names) {
  const io::CsvTable table = io::ReadCsv(is);
  const std::size_t id_col = table.Column("class_id");
  const std::size_t iou_col = table.Column("iou");
  const bool has_name = std::find(table.header.begin(), table.header.end(), "name") !=
                        table.header.end();
  const std::size_t name_col = has_name ? table.Column("name") : 0;
  std::vector<std::pair<int, MaybeValue>> rows;
  std::vector<std::pair<int, std::string>> row_names;
  for (const auto& row : table.rows) {
    if (row.size() <= std::max(id_col, iou_col)) throw Error("short CSV row");
    int id = 0;
    const auto& id_text = row[id_col];
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc() || ptr != id_text.data() + id_text.size()) continue;
    const std::string& cell = row[iou_col];
    MaybeValue value;
    if (!cell.empty() && cell != "-") {
      try {
        value = std::stod(cell);
      } catch (const std::exception&) {
        throw Error("bad IoU value '" + cell + "' for class " + id_text);
      }
    }
    rows.emplace_back(id, value);
    row_names.emplace_back(id, has_name && name_col < row.size() ? row[name_col]
                                                                  : "c" + id_text);
  }
  int max_id = -1;
  for (const auto& [id, v] : rows) max_id = std::max(max_id, id);
  if (max_id < 0) throw Error("CSV contains no class rows");
  std::vector<MaybeValue> out(max_id + 1);
  if (names) names->assign(max_id + 1, "");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[rows[i].first] = rows[i].second;
    if (names) (*names)[rows[i].first] = row_names[i].second;
  }
  if (names) {
    for (std::size_t c = 0; c < names->size(); ++c) {
      if ((*names)[c].empty()) (*names)[c] = "c" + std::to_string(c);
    }
  }
  return out;
}

PerClassStat MeanInterPrototypeAngle(const PrototypeBank& bank) {
  PerClassStat out;
  const int n = bank.num_classes();
  out.per_class.assign(n, std::nullopt);
  std::vector<int> usable;
  for (int c = 0; c < n; ++c) {
    if (!bank.initialized(c)) continue;
    if (L2Norm(bank.prototype(c)) == 0.0) {
      out.warnings.push_back("class " + std::to_string(c) + ": zero prototype skipped");
      continue;
    }
    usable.push_back(c);
  }
  if (usable.size() < 2) return out;
  for (int i : usable) {
    double sum = 0.0;
    const Vec& pi = bank.prototype(i);
    for (int j : usable) {
      if (i == j) continue;
      const Vec& pj = bank.prototype(j);
      // Half-angle form; acos loses precision near 0 and 180 degrees.
      const double ni = L2Norm(pi), nj = L2Norm(pj);
      double diff = 0.0, plus = 0.0;
      for (std::size_t k = 0; k < pi.size(); ++k) {
        const double u = pi[k] / ni, v = pj[k] / nj;
        diff += (u - v) * (u - v);
        plus += (u + v) * (u + v);
      }
      sum += 2.0 * std::atan2(std::sqrt(diff), std::sqrt(plus)) * 180.0 / std::numbers::pi;
    }
    out.per_class[i] = sum / static_cast<double>(usable.size() - 1);
  }
  out.mean = MeanOver(out.per_class, nullptr);
  return out;
}

PerClassStat MeanChannelEntropy(std::span<const FeatureSet> sets) {
  PerClassStat out;
  out.per_class.assign(sets.size(), std::nullopt);
  for (std::size_t c = 0; c < sets.size(); ++c) {
    double sum = 0.0;
    long count = 0, skipped = 0;
    for (std::size_t i = 0; i < sets[c].size(); ++i) {
      const auto v = sets[c].vector(i);
      const double total = Sum(v);
      if (!(total > 0.0)) {
        ++skipped;
        continue;
      }
      double h = 0.0;
      for (double x : v) {
        if (x > 0.0) {
          const double q = x / total;
          h -= q * std::log(q);
        }
      }
      sum += h;
      ++count;
    }
    if (skipped > 0) {
      out.warnings.push_back("class " + std::to_string(c) + ": " + std::to_string(skipped) +
                             " all-zero vectors skipped");
    }
    if (count > 0) out.per_class[c] = sum / static_cast<double>(count);
  }
  out.mean = MeanOver(out.per_class, nullptr);
  return out;
}

}  // namespace lsr
