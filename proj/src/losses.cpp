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

#include "lsr/losses.hpp"

#include <cmath>
#include <string>

namespace lsr {

namespace {

double Sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void AddScaledList(std::vector<Tensor>& dst, const std::vector<Tensor>& src,
                   double scale) {
  if (src.empty()) return;
  if (dst.empty()) {
    dst.reserve(src.size());
    for (const auto& t : src) dst.push_back(Scale(t, scale));
    return;
  }
  if (dst.size() != src.size()) throw Error("gradient lists differ in length");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].shape() != src[i].shape()) {
      throw Error("gradient shape mismatch " + dst[i].ShapeString() + " vs " +
                  src[i].ShapeString());
    }
    auto d = dst[i].data();
    auto s = src[i].data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += scale * s[k];
  }
}

void CheckProbs(const Tensor& probs) {
  if (probs.rank() != 3) throw Error("probabilities must be H x W x C, got " +
                                     probs.ShapeString());
}

}  // namespace

void LossWeights::Validate() const {
  if (lambda_c < 0 || lambda_p < 0 || lambda_n < 0 || lambda_em < 0) {
    throw Error("loss weights must be non-negative");
  }
  if (delta_f < 0) throw Error("delta_f must be non-negative");
}

void StepGradients::AddScaled(const StepGradients& other, double scale) {
  AddScaledList(source_features, other.source_features, scale);
  AddScaledList(target_features, other.target_features, scale);
  AddScaledList(source_logits, other.source_logits, scale);
  AddScaledList(target_logits, other.target_logits, scale);
}

LogitLoss WeightedCrossEntropy(const Tensor& probs, const LabelMap& labels,
                               std::span<const double> class_weights) {
  CheckProbs(probs);
  const std::size_t h = probs.dim(0), w = probs.dim(1), nc = probs.dim(2);
  if (h != static_cast<std::size_t>(labels.height()) ||
      w != static_cast<std::size_t>(labels.width())) {
    throw Error("cross-entropy: probabilities " + probs.ShapeString() +
                " do not match labels " + std::to_string(labels.height()) + "x" +
                std::to_string(labels.width()));
  }
  if (class_weights.size() != nc) throw Error("cross-entropy: wrong number of class weights");

  double weighted = 0.0, norm = 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const int y = labels.at(static_cast<int>(r), static_cast<int>(c));
      if (y < 0 || static_cast<std::size_t>(y) >= nc) continue;
      const double p = probs[(r * w + c) * nc + y];
      weighted += -class_weights[y] * std::log(p);
      norm += class_weights[y];
    }
  }
  if (norm <= 0.0) throw Error("no supervised pixels");

  LogitLoss out;
  out.value = weighted / norm;
  out.grad_logits = Tensor(probs.shape());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const int y = labels.at(static_cast<int>(r), static_cast<int>(c));
      if (y < 0 || static_cast<std::size_t>(y) >= nc) continue;
      const double scale = class_weights[y] / norm;
      const std::size_t base = (r * w + c) * nc;
      for (std::size_t k = 0; k < nc; ++k) {
        const double target = static_cast<int>(k) == y ? 1.0 : 0.0;
        out.grad_logits[base + k] = scale * (probs[base + k] - target);
      }
    }
  }
  return out;
}

LogitLoss EntropyMinLoss(const Tensor& probs) {
  CheckProbs(probs);
  const std::size_t pixels = probs.dim(0) * probs.dim(1), nc = probs.dim(2);
  LogitLoss out;
  out.grad_logits = Tensor(probs.shape());
  const double inv_n = 1.0 / static_cast<double>(pixels);
  double total = 0.0;
  for (std::size_t px = 0; px < pixels; ++px) {
    const std::size_t base = px * nc;
    double sq = 0.0;
    for (std::size_t k = 0; k < nc; ++k) sq += probs[base + k] * probs[base + k];
    total += sq;
    for (std::size_t k = 0; k < nc; ++k) {
      const double p = probs[base + k];
      out.grad_logits[base + k] = -inv_n * p * (p - sq);
    }
  }
  out.value = -0.5 * inv_n * total;
  return out;
}

SetLoss ClusteringLoss(std::span<const FeatureSet> sets,
                       std::span<const std::optional<Vec>> centers) {
  if (sets.size() != centers.size()) {
    throw Error("clustering: " + std::to_string(sets.size()) + " sets but " +
                std::to_string(centers.size()) + " centres");
  }
  SetLoss out;
  out.grads.resize(sets.size());
  for (std::size_t c = 0; c < sets.size(); ++c) {
    out.grads[c].assign(sets[c].values().size(), 0.0);
    if (!sets[c].empty() && centers[c]) ++out.contributing_classes;
  }
  if (out.contributing_classes == 0) return out;

  const double inv_m = 1.0 / out.contributing_classes;
  for (std::size_t c = 0; c < sets.size(); ++c) {
    const auto& set = sets[c];
    if (set.empty() || !centers[c]) continue;
    const Vec& p = *centers[c];
    const int k = set.channels();
    if (static_cast<int>(p.size()) != k) throw Error("clustering: centre length mismatch");
    const double scale = inv_m / (static_cast<double>(set.size()) * k);
    double class_sum = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto f = set.vector(i);
      double* g = out.grads[c].data() + i * k;
      for (int ch = 0; ch < k; ++ch) {
        const double diff = f[ch] - p[ch];
        class_sum += std::abs(diff);
        g[ch] = scale * Sign(diff);
      }
    }
    out.value += scale * class_sum;
  }
  return out;
}

SetLoss ClusteringLoss(std::span<const FeatureSet> sets, const PrototypeBank& bank) {
  std::vector<std::optional<Vec>> centers(bank.num_classes());
  for (int c = 0; c < bank.num_classes(); ++c) {
    if (bank.initialized(c)) centers[c] = bank.prototype(c);
  }
  return ClusteringLoss(sets, centers);
}

PerpendicularityResult PerpendicularityLoss(const PrototypeBank& previous,
                                            std::span<const std::optional<Vec>> centroids,
                                            long step) {
  PerpendicularityResult out;
  out.smoothed = previous.Updated(centroids, step);
  const int n = out.smoothed.num_classes();
  const int k = out.smoothed.channels();
  out.centroid_grads.assign(n, Vec(k, 0.0));

  std::vector<int> active;
  for (int c = 0; c < n; ++c) {
    if (out.smoothed.initialized(c)) active.push_back(c);
  }
  out.classes = static_cast<int>(active.size());
  if (active.size() < 2) return out;

  std::vector<double> norms(n, 0.0);
  for (int c : active) {
    norms[c] = L2Norm(out.smoothed.prototype(c));
    if (norms[c] == 0.0) {
      throw Error("perpendicularity: prototype of class " + std::to_string(c) +
                  " has zero norm");
    }
  }

  const double m = static_cast<double>(active.size());
  const double pair_scale = 1.0 / (m * (m - 1.0));
  std::vector<Vec> proto_grads(n, Vec(k, 0.0));
  double sum = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const int i = active[a];
    const Vec& pi = out.smoothed.prototype(i);
    for (std::size_t b = 0; b < active.size(); ++b) {
      if (a == b) continue;
      const int j = active[b];
      const Vec& pj = out.smoothed.prototype(j);
      const double cos = Dot(pi, pj) / (norms[i] * norms[j]);
      sum += cos;
      // Each ordered pair (i, j) and (j, i) contributes the same cosine, so
      // d/dp_i collects twice the one-sided derivative.
      for (int ch = 0; ch < k; ++ch) {
        proto_grads[i][ch] += 2.0 * pair_scale *
                              (pj[ch] / (norms[i] * norms[j]) -
                               cos * pi[ch] / (norms[i] * norms[i]));
      }
    }
  }
  out.value = pair_scale * sum;

  for (int c = 0; c < n; ++c) {
    if (!centroids[c]) continue;
    // A first observation copies the centroid; later ones blend with weight
    // (1 - eta).
    const double factor = previous.initialized(c) ? 1.0 - previous.eta() : 1.0;
    for (int ch = 0; ch < k; ++ch) out.centroid_grads[c][ch] = factor * proto_grads[c][ch];
  }
  return out;
}

FilteredVector NormFilter(std::span<const double> feat) {
  FilteredVector out;
  out.values.assign(feat.begin(), feat.end());
  out.kept.assign(feat.size(), true);
  const double mean = Mean(feat);
  for (std::size_t i = 0; i < feat.size(); ++i) {
    if (feat[i] < mean) {
      out.values[i] = 0.0;
      out.kept[i] = false;
    }
  }
  return out;
}

NormAlignmentResult NormAlignmentLoss(const FeatureSet& source, const FeatureSet& target,
                                      double delta_f, std::optional<double> norm_target) {
  NormAlignmentResult out;
  out.source_grads.assign(source.values().size(), 0.0);
  out.target_grads.assign(target.values().size(), 0.0);

  double source_norm_sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    source_norm_sum += L2Norm(NormFilter(source.vector(i)).values);
  }
  out.new_norm_target =
      source.empty() ? 0.0 : source_norm_sum / static_cast<double>(source.size());

  if (!norm_target || !(*norm_target > 0.0)) {
    out.skipped = true;
    return out;
  }
  const double t = *norm_target;
  const double goal = t + delta_f;

  struct Included {
    Vec* grads;
    std::size_t offset;
    FilteredVector filtered;
    double norm;
  };
  std::vector<Included> included;
  auto collect = [&](const FeatureSet& set, Vec& grads) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      FilteredVector fv = NormFilter(set.vector(i));
      const double n = L2Norm(fv.values);
      if (n == 0.0) {
        ++out.excluded;
        continue;
      }
      included.push_back({&grads, i * set.channels(), std::move(fv), n});
    }
  };
  collect(source, out.source_grads);
  collect(target, out.target_grads);
  if (included.empty()) return out;

  const double inv_n = 1.0 / static_cast<double>(included.size());
  double sum = 0.0;
  for (auto& item : included) {
    const double residual = goal - item.norm;
    sum += std::abs(residual) / t;
    const double coeff = -Sign(residual) * inv_n / (t * item.norm);
    for (std::size_t ch = 0; ch < item.filtered.values.size(); ++ch) {
      if (item.filtered.kept[ch]) {
        (*item.grads)[item.offset + ch] = coeff * item.filtered.values[ch];
      }
    }
  }
  out.value = sum * inv_n;
  return out;
}

std::vector<Tensor> ZeroFeatureGrads(std::span<const FeatureMap> feats) {
  std::vector<Tensor> out;
  out.reserve(feats.size());
  for (const auto& f : feats) {
    out.emplace_back(std::vector<std::size_t>{static_cast<std::size_t>(f.height()),
                                              static_cast<std::size_t>(f.width()),
                                              static_cast<std::size_t>(f.channels())});
  }
  return out;
}

namespace {

void AddAt(std::vector<Tensor>& out, const FeatureLocation& where,
           std::span<const double> g, double scale) {
  Tensor& t = out.at(where.image);
  const std::size_t k = t.dim(2);
  const std::size_t base = (static_cast<std::size_t>(where.row) * t.dim(1) + where.col) * k;
  for (std::size_t ch = 0; ch < k; ++ch) t[base + ch] += scale * g[ch];
}

}  // namespace

void ScatterSetGrads(std::span<const FeatureSet> sets, std::span<const Vec> grads,
                     std::vector<Tensor>& out) {
  for (std::size_t c = 0; c < sets.size(); ++c) {
    const auto& set = sets[c];
    const std::size_t k = static_cast<std::size_t>(set.channels());
    for (std::size_t i = 0; i < set.size(); ++i) {
      AddAt(out, set.location(i), std::span<const double>(grads[c]).subspan(i * k, k), 1.0);
    }
  }
}

void ScatterCentroidGrads(std::span<const FeatureSet> sets,
                          std::span<const Vec> centroid_grads, std::vector<Tensor>& out) {
  for (std::size_t c = 0; c < sets.size(); ++c) {
    const auto& set = sets[c];
    if (set.empty()) continue;
    const double share = 1.0 / static_cast<double>(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      AddAt(out, set.location(i), centroid_grads[c], share);
    }
  }
}

LossBundle TotalLoss(const LossTerms& terms, const LossWeights& weights) {
  weights.Validate();
  LossBundle out;
  auto& v = out.values;
  v.ce = terms.ce.value;
  v.clust_source = terms.clust_source.value;
  v.clust_target = terms.clust_target.value;
  v.perp = terms.perp.value;
  v.norm = terms.norm.value;
  v.em = terms.em.value;
  v.total = v.ce + weights.lambda_c * (v.clust_source + v.clust_target) +
            weights.lambda_p * v.perp + weights.lambda_n * v.norm +
            weights.lambda_em * v.em;

  out.grads.AddScaled(terms.ce.grads, 1.0);
  out.grads.AddScaled(terms.clust_source.grads, weights.lambda_c);
  out.grads.AddScaled(terms.clust_target.grads, weights.lambda_c);
  out.grads.AddScaled(terms.perp.grads, weights.lambda_p);
  out.grads.AddScaled(terms.norm.grads, weights.lambda_n);
  out.grads.AddScaled(terms.em.grads, weights.lambda_em);
  return out;
}

}  // namespace lsr
