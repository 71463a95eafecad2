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

#include "lsr/gradsuite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "lsr/decimation.hpp"
#include "lsr/losses.hpp"
#include "lsr/network.hpp"
#include "lsr/rng.hpp"
#include "lsr/trainer.hpp"

namespace lsr {

namespace {

constexpr int kMaxRedraws = 1000;

// A drawn instance: the point, its analytic gradient and the function.
struct Instance {
  Vec point;
  Vec analytic;
  ScalarFunction f;
};

using Generator = std::function<std::optional<Instance>(Rng&, const GradSuiteOptions&)>;

Tensor RandomLogits(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  Tensor t({h, w, c});
  for (auto& v : t.data()) v = rng.Normal(0.0, 1.5);
  return t;
}

LabelMap RandomLabels(Rng& rng, int h, int w, int classes, double void_prob) {
  LabelMap labels(h, w, 255, 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      labels.at(r, c) = rng.Bernoulli(void_prob) ? 255 : rng.UniformInt(0, classes - 1);
    }
  }
  labels.at(0, 0) = rng.UniformInt(0, classes - 1);
  return labels;
}

std::optional<Instance> CrossEntropyInstance(Rng& rng, const GradSuiteOptions&) {
  const int h = rng.UniformInt(2, 6), w = rng.UniformInt(2, 6), nc = rng.UniformInt(2, 5);
  const Tensor logits = RandomLogits(rng, h, w, nc);
  const LabelMap labels = RandomLabels(rng, h, w, nc, 0.15);
  Vec weights(nc);
  for (auto& x : weights) x = rng.Uniform(0.2, 1.0);
  Instance inst;
  inst.point.assign(logits.data().begin(), logits.data().end());
  const auto grad = WeightedCrossEntropy(Softmax(logits, 2), labels, weights).grad_logits;
  inst.analytic.assign(grad.data().begin(), grad.data().end());
  const auto shape = logits.shape();
  inst.f = [shape, labels, weights](std::span<const double> x) {
    return WeightedCrossEntropy(Softmax(Tensor(shape, Vec(x.begin(), x.end())), 2), labels,
                                weights)
        .value;
  };
  return inst;
}

std::optional<Instance> EntropyMinInstance(Rng& rng, const GradSuiteOptions&) {
  const int h = rng.UniformInt(2, 6), w = rng.UniformInt(2, 6), nc = rng.UniformInt(2, 5);
  const Tensor logits = RandomLogits(rng, h, w, nc);
  Instance inst;
  inst.point.assign(logits.data().begin(), logits.data().end());
  const auto grad = EntropyMinLoss(Softmax(logits, 2)).grad_logits;
  inst.analytic.assign(grad.data().begin(), grad.data().end());
  const auto shape = logits.shape();
  inst.f = [shape](std::span<const double> x) {
    return EntropyMinLoss(Softmax(Tensor(shape, Vec(x.begin(), x.end())), 2)).value;
  };
  return inst;
}

// Rebuilds class sets with the layout of `templ` from a flat vector.
std::vector<FeatureSet> SetsFrom(const std::vector<FeatureSet>& templ, std::span<const double> x) {
  std::vector<FeatureSet> out;
  std::size_t offset = 0;
  for (const auto& set : templ) {
    FeatureSet s(set.class_id(), set.origin(), set.channels());
    const std::size_t k = static_cast<std::size_t>(set.channels());
    for (std::size_t i = 0; i < set.size(); ++i) {
      s.Add(x.subspan(offset, k), set.location(i));
      offset += k;
    }
    out.push_back(std::move(s));
  }
  return out;
}

Vec Flatten(const std::vector<FeatureSet>& sets) {
  Vec out;
  for (const auto& s : sets) out.insert(out.end(), s.values().begin(), s.values().end());
  return out;
}

std::optional<Instance> ClusteringInstance(Rng& rng, const GradSuiteOptions& opts) {
  const int nc = rng.UniformInt(2, 4), k = rng.UniformInt(2, 6);
  std::vector<FeatureSet> sets;
  std::vector<std::optional<Vec>> centers(nc);
  bool any = false;
  for (int c = 0; c < nc; ++c) {
    FeatureSet set(c, Domain::kSource, k);
    const int n = rng.UniformInt(0, 5);
    for (int i = 0; i < n; ++i) {
      Vec v(k);
      for (auto& x : v) x = rng.Uniform(0.0, 2.0);
      set.Add(v, {0, c, i});
    }
    if (rng.Bernoulli(0.8)) {
      Vec p(k);
      for (auto& x : p) x = rng.Uniform(0.0, 2.0);
      centers[c] = p;
    }
    if (n > 0 && centers[c]) any = true;
    for (std::size_t i = 0; i < set.size() && centers[c]; ++i) {
      const auto v = set.vector(i);
      for (int ch = 0; ch < k; ++ch) {
        if (std::abs(v[ch] - (*centers[c])[ch]) < opts.kink_margin) return std::nullopt;
      }
    }
    sets.push_back(std::move(set));
  }
  if (!any) return std::nullopt;
  Instance inst;
  inst.point = Flatten(sets);
  const SetLoss loss = ClusteringLoss(sets, centers);
  for (const auto& g : loss.grads) inst.analytic.insert(inst.analytic.end(), g.begin(), g.end());
  inst.f = [sets, centers](std::span<const double> x) {
    return ClusteringLoss(SetsFrom(sets, x), centers).value;
  };
  return inst;
}

std::optional<Instance> PerpendicularityInstance(Rng& rng, const GradSuiteOptions&) {
  const int nc = rng.UniformInt(2, 5), k = rng.UniformInt(2, 6);
  const double eta = rng.Uniform(0.5, 0.95);
  PrototypeBank previous(nc, k, eta);
  for (int c = 0; c < nc; ++c) {
    if (!rng.Bernoulli(0.5)) continue;
    Vec p(k);
    for (auto& x : p) x = rng.Uniform(0.1, 2.0);
    previous.Set(c, p);
  }
  std::vector<std::optional<Vec>> centroids(nc);
  std::vector<int> present;
  for (int c = 0; c < nc; ++c) {
    if (!rng.Bernoulli(0.7)) continue;
    Vec v(k);
    for (auto& x : v) x = rng.Uniform(0.1, 2.0);
    centroids[c] = v;
    present.push_back(c);
  }
  if (present.empty() || previous.Updated(centroids, 0).initialized_count() < 2) {
    return std::nullopt;
  }
  Instance inst;
  const PerpendicularityResult res = PerpendicularityLoss(previous, centroids, 1);
  for (int c : present) {
    inst.point.insert(inst.point.end(), centroids[c]->begin(), centroids[c]->end());
    inst.analytic.insert(inst.analytic.end(), res.centroid_grads[c].begin(),
                         res.centroid_grads[c].end());
  }
  inst.f = [previous, centroids, present, k](std::span<const double> x) {
    auto c2 = centroids;
    for (std::size_t i = 0; i < present.size(); ++i) {
      const auto part = x.subspan(i * k, static_cast<std::size_t>(k));
      c2[present[i]] = Vec(part.begin(), part.end());
    }
    return PerpendicularityLoss(previous, c2, 1).value;
  };
  return inst;
}

// True when every kept channel is clear of the filter threshold and the
// filtered norm is clear of the target.
bool NormSafe(std::span<const double> v, std::optional<double> goal, double margin) {
  const double mean = Mean(v);
  for (double x : v) {
    if (x > 0.0 && std::abs(x - mean) < margin) return false;
  }
  const double n = L2Norm(NormFilter(v).values);
  if (n == 0.0) return true;
  return !goal || std::abs(*goal - n) >= margin;
}

std::optional<Instance> NormInstance(Rng& rng, const GradSuiteOptions& opts) {
  const int k = rng.UniformInt(3, 8);
  const double target = rng.Uniform(0.5, 3.0), delta = rng.Uniform(0.0, 0.3);
  auto make = [&](Domain d, int n) {
    FeatureSet set(-1, d, k);
    for (int i = 0; i < n; ++i) {
      Vec v(k);
      for (auto& x : v) x = rng.Bernoulli(0.2) ? 0.0 : rng.Uniform(0.0, 2.0);
      set.Add(v, {0, 0, i});
    }
    return set;
  };
  const FeatureSet src = make(Domain::kSource, rng.UniformInt(1, 6));
  const FeatureSet tgt = make(Domain::kTarget, rng.UniformInt(1, 6));
  for (const FeatureSet* s : {&src, &tgt}) {
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!NormSafe(s->vector(i), target + delta, opts.kink_margin)) return std::nullopt;
    }
  }
  const NormAlignmentResult res = NormAlignmentLoss(src, tgt, delta, target);
  Instance inst;
  inst.point.assign(src.values().begin(), src.values().end());
  inst.point.insert(inst.point.end(), tgt.values().begin(), tgt.values().end());
  inst.analytic = res.source_grads;
  inst.analytic.insert(inst.analytic.end(), res.target_grads.begin(), res.target_grads.end());
  const std::size_t split = src.values().size();
  inst.f = [src, tgt, delta, target, split](std::span<const double> x) {
    const std::vector<FeatureSet> s = SetsFrom({src}, x.first(split));
    const std::vector<FeatureSet> t = SetsFrom({tgt}, x.subspan(split));
    return NormAlignmentLoss(s[0], t[0], delta, target).value;
  };
  return inst;
}

// Scene of a few solid blocks with noisy colours.
void RandomScene(Rng& rng, int size, int classes, const std::vector<Vec>& colors, Image& image,
                 LabelMap& labels) {
  labels = LabelMap(size, size, 255, 0);
  const int block = 2;
  for (int r = 0; r < size; r += block) {
    for (int c = 0; c < size; c += block) {
      const int cls = rng.UniformInt(0, classes - 1);
      for (int dr = 0; dr < block; ++dr) {
        for (int dc = 0; dc < block; ++dc) labels.at(r + dr, c + dc) = cls;
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    labels.at(rng.UniformInt(0, size - 1), rng.UniformInt(0, size - 1)) =
        rng.UniformInt(0, classes - 1);
  }
  image = Image(size, size, 3);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        image.at(r, c, ch) = colors[labels.at(r, c)][ch] + rng.Normal(0.0, 0.1);
      }
    }
  }
}

// Distance of the step's piecewise terms from their kinks.
double AdaptMargin(const ForwardCache& src, const ForwardCache& tgt, const LabelMap& src_latent,
                   const DetachedInputs& det, double delta_f) {
  double margin = std::min(TinySegNet::ReluMargin(src), TinySegNet::ReluMargin(tgt));
  auto visit = [&](const FeatureMap& feats, const LabelMap* latent, const PrototypeBank* bank,
                   const std::vector<std::optional<Vec>>* centers) {
    for (int r = 0; r < feats.height(); ++r) {
      for (int c = 0; c < feats.width(); ++c) {
        const auto f = feats.at(r, c);
        const int cls = latent->at(r, c);
        const Vec* p = nullptr;
        if (cls >= 0 && cls < 255) {
          if (bank && bank->initialized(cls)) p = &bank->prototype(cls);
          if (centers && (*centers)[cls]) p = &*(*centers)[cls];
        }
        const double mean = Mean(f);
        for (std::size_t ch = 0; ch < f.size(); ++ch) {
          if (f[ch] <= 0.0) continue;
          if (p) margin = std::min(margin, std::abs(f[ch] - (*p)[ch]));
          margin = std::min(margin, std::abs(f[ch] - mean));
        }
        const double n = L2Norm(NormFilter(f).values);
        if (n > 0.0 && det.norm_target) {
          margin = std::min(margin, std::abs(*det.norm_target + delta_f - n));
        }
      }
    }
  };
  visit(src.features, &src_latent, &det.clust_bank, nullptr);
  visit(tgt.features, &det.target_latent[0], nullptr, &det.target_centers);
  return margin;
}

std::optional<Instance> EndToEndInstance(Rng& rng, const GradSuiteOptions& opts) {
  NetShape shape;
  shape.window = 2;
  shape.hidden = 6;
  shape.features = 4;
  shape.classes = 3;
  TinySegNet net = TinySegNet::Random(shape, rng);
  for (auto& p : net.mutable_params()) p += rng.Normal(0.0, 0.1);

  const ClassSet classes = ClassSet::Numbered(shape.classes);
  std::vector<Vec> colors(shape.classes, Vec(3));
  for (auto& c : colors) {
    for (auto& x : c) x = rng.Uniform(0.0, 1.0);
  }
  Image src_img, tgt_img;
  LabelMap src_labels, tgt_labels;
  RandomScene(rng, 6, shape.classes, colors, src_img, src_labels);
  RandomScene(rng, 6, shape.classes, colors, tgt_img, tgt_labels);
  DecimationConfig dc;
  dc.window_h = dc.window_w = shape.window;
  dc.class_weights.assign(shape.classes, 1.0);
  const LabelMap src_latent = Decimate(src_labels, dc, classes);

  TrainConfig cfg;
  cfg.net = shape;
  cfg.weights.lambda_c = rng.Uniform(0.2, 1.0);
  cfg.weights.lambda_p = rng.Uniform(0.2, 1.0);
  cfg.weights.lambda_n = rng.Uniform(0.2, 1.0);
  cfg.weights.lambda_em = rng.Uniform(0.2, 1.0);
  cfg.weights.delta_f = 0.1;
  cfg.target_center =
      rng.Bernoulli(0.5) ? TargetCenter::kTargetCentroid : TargetCenter::kSourcePrototype;
  Vec ce_weights(shape.classes);
  for (auto& w : ce_weights) w = rng.Uniform(0.3, 1.0);

  AdaptState state{PrototypeBank(shape.classes, shape.features, 0.8), std::nullopt};
  for (int c = 0; c < shape.classes; ++c) {
    if (!rng.Bernoulli(0.6)) continue;
    Vec p(shape.features);
    for (auto& x : p) x = rng.Uniform(0.0, 1.5);
    state.bank.Set(c, p);
  }
  if (rng.Bernoulli(0.85)) state.norm_target = rng.Uniform(0.3, 2.0);
  const long step = rng.UniformInt(1, 100);

  const ForwardCache src = net.Forward(src_img);
  const ForwardCache tgt = net.Forward(tgt_img);
  bool any_source = false;
  for (int v : src_latent.data()) any_source |= classes.is_class(v);
  if (!any_source) return std::nullopt;
  const DetachedInputs det = DetachStep(src, src_latent, tgt, state, classes, cfg, step);
  if (AdaptMargin(src, tgt, src_latent, det, cfg.weights.delta_f) < opts.kink_margin) return std::nullopt;

  const AdaptObjective obj = EvaluateAdaptObjective(src, src_labels, src_latent, tgt, det,
                                                    classes, cfg, ce_weights, step);
  Instance inst;
  inst.point = net.params();
  inst.analytic = BackwardStep(net, src, &tgt, obj.bundle.grads);
  inst.f = [=](std::span<const double> x) {
    const TinySegNet n(shape, Vec(x.begin(), x.end()));
    return EvaluateAdaptObjective(n.Forward(src_img), src_labels, src_latent,
                                  n.Forward(tgt_img), det, classes, cfg, ce_weights, step)
        .bundle.values.total;
  };
  return inst;
}

Generator GeneratorFor(const std::string& name) {
  if (name == "ce") return CrossEntropyInstance;
  if (name == "clust") return ClusteringInstance;
  if (name == "perp") return PerpendicularityInstance;
  if (name == "norm") return NormInstance;
  if (name == "em") return EntropyMinInstance;
  if (name == "e2e") return EndToEndInstance;
  throw Error("unknown loss '" + name + "' (expected ce, clust, perp, norm, em, e2e or all)");
}

}  // namespace

const std::vector<std::string>& GradCheckNames() {
  static const std::vector<std::string> names = {"ce", "clust", "perp", "norm", "em", "e2e"};
  return names;
}

GradCheckReport RunGradCheck(const std::string& name, const GradSuiteOptions& opts) {
  if (opts.instances <= 0) throw Error("instance count must be positive");
  const Generator gen = GeneratorFor(name);
  const Rng root = Rng(opts.seed).Fork(static_cast<std::uint64_t>(
      std::find(GradCheckNames().begin(), GradCheckNames().end(), name) -
      GradCheckNames().begin()));
  std::vector<GradCheckReport> reports;
  for (int i = 0; i < opts.instances; ++i) {
    Rng rng = root.Fork(static_cast<std::uint64_t>(i));
    std::optional<Instance> inst;
    for (int attempt = 0; attempt < kMaxRedraws && !inst; ++attempt) inst = gen(rng, opts);
    if (!inst) {
      throw Error(name + ": no instance clear of kinks after " + std::to_string(kMaxRedraws) +
                  " draws");
    }
    reports.push_back(CheckGradient(inst->f, inst->analytic, inst->point, opts.h, opts.tol, name));
  }
  return MergeReports(reports, name, opts.tol);
}

std::vector<GradCheckReport> RunAllGradChecks(const GradSuiteOptions& opts) {
  std::vector<GradCheckReport> out;
  for (const auto& name : GradCheckNames()) out.push_back(RunGradCheck(name, opts));
  return out;
}

}  // namespace lsr
