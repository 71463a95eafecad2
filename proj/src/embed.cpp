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

#include "lsr/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "lsr/decimation.hpp"
#include "lsr/io.hpp"

namespace lsr {

namespace {

void SampleDomain(const TinySegNet& net, const Dataset& data, Domain domain,
                  const ClassSet& classes, double peak_ratio, int per_class, Rng rng,
                  std::vector<EmbedSample>& out) {
  DecimationConfig dc;
  dc.window_h = dc.window_w = net.shape().window;
  dc.peak_ratio = peak_ratio;
  dc.class_weights.assign(classes.size(), 1.0);
  std::vector<FeatureMap> feats;
  std::vector<LabelMap> latent;
  for (std::size_t i = 0; i < data.size(); ++i) {
    feats.push_back(net.Forward(data.images[i]).features);
    latent.push_back(Decimate(data.labels[i], dc, classes));
  }
  const ClassFeatureSets sets = GatherClassFeatures(feats, latent, classes, domain);
  for (const FeatureSet& set : sets.classes) {
    Rng class_rng = rng.Fork(static_cast<std::uint64_t>(set.class_id()));
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t keep = std::min(order.size(), static_cast<std::size_t>(per_class));
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t j = i + class_rng.UniformInt(order.size() - i);
      std::swap(order[i], order[j]);
    }
    order.resize(keep);
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) {
      const auto v = set.vector(i);
      out.push_back(EmbedSample{domain, set.class_id(), set.location(i), Vec(v.begin(), v.end())});
    }
  }
}

}  // namespace

std::vector<EmbedSample> SampleEmbedding(const TinySegNet& net, const Benchmark& bench,
                                         double peak_ratio, int per_class, std::uint64_t seed) {
  if (per_class < 1) throw Error("embed needs at least one vector per class");
  const Rng root(seed);
  std::vector<EmbedSample> out;
  SampleDomain(net, bench.source_val, Domain::kSource, bench.classes, peak_ratio, per_class,
               root.Fork(1), out);
  SampleDomain(net, bench.target_val, Domain::kTarget, bench.classes, peak_ratio, per_class,
               root.Fork(2), out);
  return out;
}

Vec Pca::Project(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim) throw Error("projection dimension mismatch");
  Vec out(components, 0.0);
  for (int c = 0; c < components; ++c) {
    const auto u = component(c);
    for (int d = 0; d < dim; ++d) out[c] += (x[d] - mean[d]) * u[d];
  }
  return out;
}

Pca FitPca(std::span<const double> rows, int dim, int components) {
  if (dim < 1) throw Error("PCA needs a positive dimension");
  if (rows.size() % dim != 0) throw Error("PCA input is not a whole number of rows");
  const std::size_t n = rows.size() / dim;
  if (n < 2) throw Error("PCA needs at least two rows");
  if (components < 1) throw Error("PCA needs at least one component");

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      rows.data(), static_cast<Eigen::Index>(n), dim);
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mu;
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");

  Pca pca;
  pca.dim = dim;
  pca.components = std::min(components, dim);
  pca.mean.assign(mu.data(), mu.data() + dim);
  pca.total_variance = cov.trace();
  // Eigen sorts eigenvalues ascending.
  for (int c = 0; c < pca.components; ++c) {
    const int k = dim - 1 - c;
    Eigen::VectorXd u = eig.eigenvectors().col(k);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u[arg] < 0.0) u = -u;
    u.array() += 0.0;  // no negative zeros in the output
    pca.basis.insert(pca.basis.end(), u.data(), u.data() + dim);
    pca.explained_variance.push_back(std::max(eig.eigenvalues()[k], 0.0));
  }
  return pca;
}

double OrthonormalityError(const Pca& pca) {
  double worst = 0.0;
  for (int i = 0; i < pca.components; ++i) {
    for (int j = i; j < pca.components; ++j) {
      const double dot = Dot(pca.component(i), pca.component(j));
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

void WriteEmbeddingCsv(std::ostream& os, std::span<const EmbedSample> samples,
                       const ClassSet& classes, const Pca& pca) {
  os << "domain,class,image,row,col";
  for (int d = 0; d < pca.dim; ++d) os << ",f" << d;
  for (int c = 0; c < pca.components; ++c) os << ",pc" << c;
  os << '\n';
  for (const auto& s : samples) {
    os << DomainName(s.domain) << ',' << classes.name(s.class_id) << ',' << s.where.image << ','
       << s.where.row << ',' << s.where.col;
    for (double v : s.feature) os << ',' << io::FormatReal(v);
    for (double v : pca.Project(s.feature)) os << ',' << io::FormatReal(v);
    os << '\n';
  }
}

void WritePcaCsv(std::ostream& os, const Pca& pca) {
  os << "component,explained_variance,ratio";
  for (int d = 0; d < pca.dim; ++d) os << ",v" << d;
  os << '\n';
  for (int c = 0; c < pca.components; ++c) {
    const double ratio =
        pca.total_variance > 0.0 ? pca.explained_variance[c] / pca.total_variance : 0.0;
    os << c << ',' << io::FormatReal(pca.explained_variance[c]) << ',' << io::FormatReal(ratio);
    for (double v : pca.component(c)) os << ',' << io::FormatReal(v);
    os << '\n';
  }
}

}  // namespace lsr
