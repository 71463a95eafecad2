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

#ifndef LSR_EMBED_HPP_
#define LSR_EMBED_HPP_

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "lsr/network.hpp"
#include "lsr/prototypes.hpp"
#include "lsr/synth.hpp"

namespace lsr {

struct EmbedSample {
  Domain domain = Domain::kSource;
  int class_id = 0;
  FeatureLocation where;
  Vec feature;
};

// Latent vectors of the source and target validation splits, grouped by
// decimated ground truth, with at most `per_class` vectors kept per
// (domain, class). Kept vectors stay in scan order.
std::vector<EmbedSample> SampleEmbedding(const TinySegNet& net, const Benchmark& bench,
                                         double peak_ratio, int per_class, std::uint64_t seed);

struct Pca {
  int dim = 0;
  int components = 0;
  Vec mean;
  // dim x components, column-major: component c is basis[c * dim + d].
  Vec basis;
  Vec explained_variance;  // non-increasing
  double total_variance = 0.0;

  std::span<const double> component(int c) const {
    return {basis.data() + static_cast<std::size_t>(c) * dim, static_cast<std::size_t>(dim)};
  }
  Vec Project(std::span<const double> x) const;
};

// Eigendecomposition of the sample covariance of `rows` (n x dim,
// row-major). Each component is signed so its largest-magnitude entry is
// positive. `components` is clamped to dim.
Pca FitPca(std::span<const double> rows, int dim, int components = 3);

// Largest |<u_i, u_j> - [i == j]| over the basis columns.
double OrthonormalityError(const Pca& pca);

// domain,class,image,row,col,f0..f{K-1},pc0..pc{m-1}
void WriteEmbeddingCsv(std::ostream& os, std::span<const EmbedSample> samples,
                       const ClassSet& classes, const Pca& pca);
// component,explained_variance,ratio,v0..v{K-1}
void WritePcaCsv(std::ostream& os, const Pca& pca);

}  // namespace lsr

#endif  // LSR_EMBED_HPP_
