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

#include "lsr/trainer.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "lsr/decimation.hpp"
#include "lsr/io.hpp"

namespace lsr {

namespace {

// Rng streams forked from the training seed.
enum Stream : std::uint64_t { kInit = 1, kSourcePick = 2, kTargetPick = 3 };

bool HasZeroPrototype(const PrototypeBank& bank) {
  for (int c = 0; c < bank.num_classes(); ++c) {
    if (bank.initialized(c) && L2Norm(bank.prototype(c)) == 0.0) return true;
  }
  return false;
}

double PooledNormTarget(const FeatureMap& feats, double delta_f) {
  const FeatureMap batch[] = {feats};
  const FeatureSet pooled = PoolAllFeatures(batch, Domain::kSource);
  const FeatureSet none(-1, Domain::kTarget, feats.channels());
  return NormAlignmentLoss(pooled, none, delta_f, std::nullopt).new_norm_target;
}

void AddValues(LossValues& acc, const LossValues& v) {
  acc.ce += v.ce;
  acc.clust_source += v.clust_source;
  acc.clust_target += v.clust_target;
  acc.perp += v.perp;
  acc.norm += v.norm;
  acc.em += v.em;
  acc.total += v.total;
}

LossValues ScaledValues(const LossValues& v, double s) {
  LossValues out;
  out.ce = v.ce * s;
  out.clust_source = v.clust_source * s;
  out.clust_target = v.clust_target * s;
  out.perp = v.perp * s;
  out.norm = v.norm * s;
  out.em = v.em * s;
  out.total = v.total * s;
  return out;
}

std::string DescribeValues(const LossValues& v) {
  return fmt::format("ce={} clust_s={} clust_t={} perp={} norm={} em={} total={}", v.ce,
                     v.clust_source, v.clust_target, v.perp, v.norm, v.em, v.total);
}

double MeanConfidence(const TinySegNet& net, const Dataset& data, const PrototypeBank& bank,
                      const ClassSet& classes, const PseudoLabelConfig& cfg) {
  if (bank.initialized_count() == 0 || data.size() == 0) return 0.0;
  std::vector<FeatureMap> feats;
  feats.reserve(data.size());
  for (const auto& image : data.images) feats.push_back(net.Forward(image).features);
  return TwoPassLabel(feats, bank, classes, cfg).mean_confidence;
}

MaybeValue Gap(const TinySegNet& net, const Benchmark& bench, int limit) {
  return std::abs(MeanFilteredNorm(net, bench.source_val, limit) -
                  MeanFilteredNorm(net, bench.target_val, limit));
}

}  // namespace

std::string RegimeName(Regime regime) {
  switch (regime) {
    case Regime::kTargetSupervised: return "target_supervised";
    case Regime::kSourceOnly: return "source_only";
    case Regime::kAdapt: return "adapt";
  }
  return "unknown";
}

Regime ParseRegime(const std::string& name) {
  if (name == "target" || name == "target_supervised") return Regime::kTargetSupervised;
  if (name == "source" || name == "source_only") return Regime::kSourceOnly;
  if (name == "adapt") return Regime::kAdapt;
  throw Error("unknown regime '" + name + "' (expected target, source or adapt)");
}

std::string TargetCenterName(TargetCenter center) {
  return center == TargetCenter::kTargetCentroid ? "target_centroid" : "source_prototype";
}

TargetCenter ParseTargetCenter(const std::string& name) {
  if (name == "target_centroid") return TargetCenter::kTargetCentroid;
  if (name == "source_prototype") return TargetCenter::kSourcePrototype;
  throw Error("unknown target centre '" + name + "'");
}

void TrainConfig::Validate() const {
  net.Validate();
  optim.Validate();
  weights.Validate();
  pseudo.Validate(net.classes);
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error("eta must lie in [0, 1]");
  if (!(peak_ratio > 0.0 && peak_ratio <= 1.0)) throw Error("peak ratio must lie in (0, 1]");
  if (warmup_steps < 0) throw Error("warm-up steps must be non-negative");
  if (eval_every <= 0) throw Error("evaluation interval must be positive");
  if (diag_images <= 0) throw Error("diagnostic image count must be positive");
}

DetachedInputs DetachStep(const ForwardCache& source, const LabelMap& source_latent,
                          const ForwardCache& target, const AdaptState& state,
                          const ClassSet& classes, const TrainConfig& cfg, long step) {
  const FeatureMap src_feats[] = {source.features};
  const LabelMap src_labels[] = {source_latent};
  const ClassFeatureSets src_sets =
      GatherClassFeatures(src_feats, src_labels, classes, Domain::kSource);
  DetachedInputs out;
  out.previous_bank = state.bank;
  out.clust_bank = state.bank.Updated(BatchCentroids(src_sets), step);
  out.norm_target = state.norm_target;

  const FeatureMap tgt_feats[] = {target.features};
  TwoPassResult pseudo = TwoPassLabel(tgt_feats, out.clust_bank, classes, cfg.pseudo);
  out.target_latent = std::move(pseudo.labels);
  out.mean_confidence = pseudo.mean_confidence;
  out.target_centers.resize(classes.size());
  const PrototypeBank& centers = cfg.target_center == TargetCenter::kTargetCentroid
                                     ? pseudo.target_centroids
                                     : out.clust_bank;
  for (int c = 0; c < classes.size(); ++c) {
    if (centers.initialized(c)) out.target_centers[c] = centers.prototype(c);
  }
  return out;
}

AdaptObjective EvaluateAdaptObjective(const ForwardCache& source,
                                      const LabelMap& source_labels,
                                      const LabelMap& source_latent,
                                      const ForwardCache& target,
                                      const DetachedInputs& detached,
                                      const ClassSet& classes, const TrainConfig& cfg,
                                      std::span<const double> ce_weights, long step) {
  const LossWeights& w = cfg.weights;
  const FeatureMap src_feats[] = {source.features};
  const FeatureMap tgt_feats[] = {target.features};
  const LabelMap src_labels[] = {source_latent};
  const ClassFeatureSets src_sets =
      GatherClassFeatures(src_feats, src_labels, classes, Domain::kSource);
  const auto centroids = BatchCentroids(src_sets);

  LossTerms terms;
  LogitLoss ce = WeightedCrossEntropy(source.probs, source_labels, ce_weights);
  terms.ce.value = ce.value;
  terms.ce.grads.source_logits.push_back(std::move(ce.grad_logits));

  if (w.lambda_c > 0.0) {
    const SetLoss cs = ClusteringLoss(src_sets.classes, detached.clust_bank);
    terms.clust_source.value = cs.value;
    terms.clust_source.grads.source_features = ZeroFeatureGrads(src_feats);
    ScatterSetGrads(src_sets.classes, cs.grads, terms.clust_source.grads.source_features);

    const ClassFeatureSets tgt_sets =
        GatherClassFeatures(tgt_feats, detached.target_latent, classes, Domain::kTarget);
    const SetLoss ct = ClusteringLoss(tgt_sets.classes, detached.target_centers);
    terms.clust_target.value = ct.value;
    terms.clust_target.grads.target_features = ZeroFeatureGrads(tgt_feats);
    ScatterSetGrads(tgt_sets.classes, ct.grads, terms.clust_target.grads.target_features);
  }

  AdaptObjective out;
  out.smoothed_bank = detached.previous_bank.Updated(centroids, step);
  if (w.lambda_p > 0.0 && !HasZeroPrototype(out.smoothed_bank)) {
    const PerpendicularityResult perp =
        PerpendicularityLoss(detached.previous_bank, centroids, step);
    terms.perp.value = perp.value;
    terms.perp.grads.source_features = ZeroFeatureGrads(src_feats);
    ScatterCentroidGrads(src_sets.classes, perp.centroid_grads,
                         terms.perp.grads.source_features);
  }

  const FeatureSet src_pool = PoolAllFeatures(src_feats, Domain::kSource);
  const FeatureSet tgt_pool = PoolAllFeatures(tgt_feats, Domain::kTarget);
  const NormAlignmentResult norm =
      NormAlignmentLoss(src_pool, tgt_pool, w.delta_f, detached.norm_target);
  out.new_norm_target = norm.new_norm_target;
  if (w.lambda_n > 0.0 && !norm.skipped) {
    terms.norm.value = norm.value;
    terms.norm.grads.source_features = ZeroFeatureGrads(src_feats);
    terms.norm.grads.target_features = ZeroFeatureGrads(tgt_feats);
    const FeatureSet src_one[] = {src_pool};
    const FeatureSet tgt_one[] = {tgt_pool};
    const Vec src_g[] = {norm.source_grads};
    const Vec tgt_g[] = {norm.target_grads};
    ScatterSetGrads(src_one, src_g, terms.norm.grads.source_features);
    ScatterSetGrads(tgt_one, tgt_g, terms.norm.grads.target_features);
  }

  if (w.lambda_em > 0.0) {
    LogitLoss em = EntropyMinLoss(target.probs);
    terms.em.value = em.value;
    terms.em.grads.target_logits.push_back(std::move(em.grad_logits));
  }

  out.bundle = TotalLoss(terms, w);
  return out;
}

Vec BackwardStep(const TinySegNet& net, const ForwardCache& source, const ForwardCache* target,
                 const StepGradients& grads) {
  auto first = [](const std::vector<Tensor>& list) -> const Tensor* {
    return list.empty() ? nullptr : &list.front();
  };
  Vec out = net.Backward(source, first(grads.source_features), first(grads.source_logits));
  const Tensor* tf = first(grads.target_features);
  const Tensor* tl = first(grads.target_logits);
  if (target && (tf || tl)) {
    const Vec t = net.Backward(*target, tf, tl);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  } else if (!target && (tf || tl)) {
    throw Error("target gradients given without a target pass");
  }
  return out;
}

IoUResult EvaluateNet(const TinySegNet& net, const Dataset& data, const ClassSet& classes) {
  ConfusionMatrix cm(classes.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    cm.Add(net.Predict(data.images[i], classes.void_id()), data.labels[i]);
  }
  return IoUFromConfusion(cm);
}

double DatasetCrossEntropy(const TinySegNet& net, const Dataset& data, const ClassSet& classes) {
  if (data.size() == 0) return 0.0;
  const Vec ones(classes.size(), 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += WeightedCrossEntropy(net.Forward(data.images[i]).probs, data.labels[i], ones).value;
  }
  return sum / static_cast<double>(data.size());
}

double MeanFilteredNorm(const TinySegNet& net, const Dataset& data, int limit) {
  double sum = 0.0;
  long count = 0;
  const std::size_t n = std::min<std::size_t>(data.size(), static_cast<std::size_t>(limit));
  for (std::size_t i = 0; i < n; ++i) {
    const FeatureMap feats = net.Forward(data.images[i]).features;
    for (int r = 0; r < feats.height(); ++r) {
      for (int c = 0; c < feats.width(); ++c) {
        sum += L2Norm(NormFilter(feats.at(r, c)).values);
        ++count;
      }
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

MaybeValue LatentChannelEntropy(const TinySegNet& net, const Dataset& data,
                                const ClassSet& classes, int window, double peak_ratio,
                                int limit) {
  DecimationConfig dc;
  dc.window_h = dc.window_w = window;
  dc.peak_ratio = peak_ratio;
  dc.class_weights.assign(classes.size(), 1.0);
  std::vector<FeatureMap> feats;
  std::vector<LabelMap> latent;
  const std::size_t n = std::min<std::size_t>(data.size(), static_cast<std::size_t>(limit));
  for (std::size_t i = 0; i < n; ++i) {
    feats.push_back(net.Forward(data.images[i]).features);
    latent.push_back(Decimate(data.labels[i], dc, classes));
  }
  if (feats.empty()) return std::nullopt;
  const ClassFeatureSets sets = GatherClassFeatures(feats, latent, classes, Domain::kTarget);
  return MeanChannelEntropy(sets.classes).mean;
}

RunResult RunRegime(Regime regime, const Benchmark& bench, const TrainConfig& cfg,
                    const std::vector<MaybeValue>* reference) {
  cfg.Validate();
  const ClassSet& classes = bench.classes;
  if (cfg.net.classes != classes.size()) {
    throw Error("network has " + std::to_string(cfg.net.classes) + " classes, benchmark has " +
                std::to_string(classes.size()));
  }
  const Dataset& train =
      regime == Regime::kTargetSupervised ? bench.target_train : bench.source_train;
  if (train.size() == 0) throw Error("empty training split");
  if (regime == Regime::kAdapt && bench.target_train.size() == 0) {
    throw Error("adaptation needs target training images");
  }

  const Rng root(cfg.seed);
  Rng init = root.Fork(kInit);
  Rng source_pick = root.Fork(kSourcePick);
  Rng target_pick = root.Fork(kTargetPick);
  TinySegNet net = TinySegNet::Random(cfg.net, init);
  SgdMomentum opt(net.params().size());

  const Vec ce_weights = cfg.weighted_ce ? ClassFrequencyWeights(train.labels, classes)
                                         : Vec(classes.size(), 1.0);
  const bool adapt = regime == Regime::kAdapt;
  std::vector<LabelMap> source_latent;
  if (adapt) {
    DecimationConfig dc;
    dc.window_h = dc.window_w = cfg.net.window;
    dc.peak_ratio = cfg.peak_ratio;
    dc.class_weights = ClassFrequencyWeights(bench.source_train.labels, classes);
    for (const auto& l : bench.source_train.labels) source_latent.push_back(Decimate(l, dc, classes));
  }

  RunResult result;
  result.regime = regime;
  AdaptState state{PrototypeBank(classes.size(), cfg.net.features, cfg.eta), std::nullopt};
  const long total = cfg.optim.total_steps;
  const long warmup = std::min(cfg.warmup_steps, total);

  auto record_diagnostics = [&](MaybeValue& angle, MaybeValue& entropy, MaybeValue& gap) {
    angle = MeanInterPrototypeAngle(state.bank).mean;
    entropy = LatentChannelEntropy(net, bench.target_val, classes, cfg.net.window,
                                   cfg.peak_ratio, cfg.diag_images);
    gap = Gap(net, bench, cfg.diag_images);
  };

  std::optional<double> best_score;
  LossValues running;
  long running_steps = 0;
  for (long step = 0; step < total; ++step) {
    if (adapt && step == warmup) {
      auto& d = result.diagnostics;
      record_diagnostics(d.angle_start, d.entropy_start, d.gap_start);
    }
    const std::size_t si = source_pick.UniformInt(train.size());
    const std::size_t ti = target_pick.UniformInt(std::max<std::size_t>(bench.target_train.size(), 1));
    const ForwardCache cache = net.Forward(train.images[si]);

    Vec grads;
    LossValues values;
    if (!adapt || step < warmup) {
      const LogitLoss ce = WeightedCrossEntropy(cache.probs, train.labels[si], ce_weights);
      values.ce = values.total = ce.value;
      grads = net.Backward(cache, nullptr, &ce.grad_logits);
      if (adapt) {
        const FeatureMap feats[] = {cache.features};
        const LabelMap labels[] = {source_latent[si]};
        const auto sets = GatherClassFeatures(feats, labels, classes, Domain::kSource);
        state.bank = state.bank.Updated(BatchCentroids(sets), step);
        state.norm_target = PooledNormTarget(cache.features, cfg.weights.delta_f);
      }
    } else {
      const ForwardCache tcache = net.Forward(bench.target_train.images[ti]);
      const DetachedInputs detached =
          DetachStep(cache, source_latent[si], tcache, state, classes, cfg, step);
      AdaptObjective obj =
          EvaluateAdaptObjective(cache, train.labels[si], source_latent[si], tcache, detached,
                                 classes, cfg, ce_weights, step);
      values = obj.bundle.values;
      grads = BackwardStep(net, cache, &tcache, obj.bundle.grads);
      state.bank = std::move(obj.smoothed_bank);
      state.norm_target = obj.new_norm_target;
    }
    if (!std::isfinite(values.total)) {
      throw Error(fmt::format("non-finite loss at step {} of {} run, seed {}: {}", step,
                              RegimeName(regime), cfg.seed,
                              DescribeValues(values)));
    }
    opt.Step(net.mutable_params(), grads, cfg.optim, step);
    AddValues(running, values);
    ++running_steps;

    const long done = step + 1;
    if (done % cfg.eval_every != 0 && done != total) continue;
    EvalPoint point;
    point.step = done;
    const IoUResult eval = EvaluateNet(net, bench.target_val, classes);
    point.miou = eval.miou;
    point.pixel_accuracy = eval.pixel_accuracy;
    if (reference) {
      point.masr = Masr(PresentIoU(eval), *reference, std::nullopt, classes.names()).masr;
    }
    point.train = ScaledValues(running, 1.0 / static_cast<double>(running_steps));
    running = LossValues{};
    running_steps = 0;
    point.source_val_ce = DatasetCrossEntropy(net, bench.source_val, classes);
    if (adapt) {
      point.mean_confidence =
          MeanConfidence(net, bench.target_val, state.bank, classes, cfg.pseudo);
    }
    // Only the target-supervised reference may look at target labels.
    point.stop_score = regime == Regime::kTargetSupervised
                           ? DatasetCrossEntropy(net, bench.target_val, classes)
                           : point.source_val_ce;
    result.history.push_back(point);
    const bool eligible = !adapt || done > warmup;
    if (eligible && (!best_score || point.stop_score < *best_score)) {
      best_score = point.stop_score;
      result.best_net = net;
      result.best_step = done;
    }
  }

  if (adapt) {
    auto& d = result.diagnostics;
    record_diagnostics(d.angle_end, d.entropy_end, d.gap_end);
  }
  result.final_net = net;
  if (!cfg.early_stopping || !best_score) {
    result.best_net = net;
    result.best_step = total;
  }
  result.target_eval = EvaluateNet(result.best_net, bench.target_val, classes);
  if (reference) {
    result.target_masr =
        Masr(PresentIoU(result.target_eval), *reference, std::nullopt, classes.names()).masr;
  }
  result.final_state = std::move(state);
  return result;
}

void WriteMetricsCsv(std::ostream& os, std::span<const EvalPoint> history) {
  os << "step,miou,pixel_accuracy,masr,ce,clust,perp,norm,em,total,source_val_ce,"
        "mean_confidence,stop_score\n";
  for (const auto& p : history) {
    os << p.step << ',' << io::FormatReal(p.miou) << ',' << io::FormatReal(p.pixel_accuracy)
       << ',' << (p.masr ? io::FormatReal(*p.masr) : "-") << ','
       << io::FormatReal(p.train.ce) << ',' << io::FormatReal(p.train.clust()) << ','
       << io::FormatReal(p.train.perp) << ',' << io::FormatReal(p.train.norm) << ','
       << io::FormatReal(p.train.em) << ',' << io::FormatReal(p.train.total) << ','
       << io::FormatReal(p.source_val_ce) << ',' << io::FormatReal(p.mean_confidence) << ','
       << io::FormatReal(p.stop_score) << '\n';
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const NetShape& s = ckpt.net.shape();
  std::ostringstream os;
  os << "LSRCKPT\n"
     << s.window << ' ' << s.in_channels << ' ' << s.hidden << ' ' << s.features << ' '
     << s.classes << ' ' << ckpt.step << ' ' << ckpt.seed << '\n';
  for (double p : ckpt.net.params()) os << io::FormatReal(p) << '\n';
  io::WriteTextFile(path, os.str());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::istringstream is(io::ReadTextFile(path));
  std::string magic;
  if (!(is >> magic) || magic != "LSRCKPT") {
    throw Error(path.string() + ": missing LSRCKPT header");
  }
  NetShape s;
  Checkpoint ckpt;
  if (!(is >> s.window >> s.in_channels >> s.hidden >> s.features >> s.classes >> ckpt.step >>
        ckpt.seed)) {
    throw Error(path.string() + ": malformed checkpoint header");
  }
  s.Validate();
  Vec params(s.param_count());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(is >> params[i])) {
      throw Error(path.string() + ": expected " + std::to_string(params.size()) +
                  " parameters, found " + std::to_string(i));
    }
  }
  double extra;
  if (is >> extra) throw Error(path.string() + ": trailing data after parameters");
  ckpt.net = TinySegNet(s, std::move(params));
  return ckpt;
}

}  // namespace lsr
