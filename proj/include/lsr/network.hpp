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

#ifndef LSR_NETWORK_HPP_
#define LSR_NETWORK_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "lsr/core.hpp"
#include "lsr/rng.hpp"

namespace lsr {

struct NetShape {
  int window = 4;
  int in_channels = 3;
  int hidden = 16;
  int features = 8;  // K
  int classes = 5;

  int input_size() const { return window * window * in_channels; }
  std::size_t param_count() const;
  void Validate() const;

  friend bool operator==(const NetShape&, const NetShape&) = default;
};

// Intermediate values of one forward pass, needed by Backward.
struct ForwardCache {
  int height = 0;
  int width = 0;
  std::vector<double> inputs;       // cells x input_size
  std::vector<double> hidden_pre;   // cells x hidden
  std::vector<double> feature_pre;  // cells x K
  FeatureMap features;
  Tensor latent_logits;  // h' x w' x C
  Tensor probs;          // H x W x C, nearest-upsampled softmax
};

// Encoder: each non-overlapping window is flattened and passed through
// affine -> ReLU -> affine -> ReLU, giving one K-vector per latent cell.
// Decoder: per-cell affine K -> |C|, softmax, nearest upsampling.
//
// Parameters live in one flat vector ordered W1 (hidden x input), b1,
// W2 (K x hidden), b2, W3 (C x K), b3, all row-major.
class TinySegNet {
 public:
  TinySegNet() = default;
  TinySegNet(NetShape shape, Vec params);

  static TinySegNet Zeros(const NetShape& shape);
  // He-style Gaussian weights, small positive encoder biases.
  static TinySegNet Random(const NetShape& shape, Rng& rng);

  const NetShape& shape() const { return shape_; }
  const Vec& params() const { return params_; }
  Vec& mutable_params() { return params_; }

  ForwardCache Forward(const Image& image) const;

  // Parameter gradient given upstream gradients w.r.t. the features
  // (h' x w' x K) and the full-resolution logits (H x W x C). Either may be
  // null.
  Vec Backward(const ForwardCache& cache, const Tensor* feature_grad,
               const Tensor* logit_grad) const;

  // Arg-max labels at full resolution.
  LabelMap Predict(const Image& image, int void_id) const;

  // Smallest |pre-activation| over both ReLU layers of a pass; kink margin
  // for finite-difference checks.
  static double ReluMargin(const ForwardCache& cache);

 private:
  struct Offsets {
    std::size_t w1, b1, w2, b2, w3, b3, end;
  };
  Offsets offsets() const;

  NetShape shape_;
  Vec params_;
};

}  // namespace lsr

#endif  // LSR_NETWORK_HPP_
