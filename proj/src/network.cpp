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

#include "lsr/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace lsr {

namespace {
// Inputs are centred before the first affine map.
constexpr double kInputCentre = 0.5;
}  // namespace

std::size_t NetShape::param_count() const {
  const std::size_t in = input_size();
  return hidden * in + hidden + features * hidden + features + classes * features +
         classes;
}

void NetShape::Validate() const {
  if (window <= 0 || in_channels <= 0 || hidden <= 0 || features <= 0 || classes <= 0) {
    throw Error("network dimensions must be positive");
  }
}

TinySegNet::TinySegNet(NetShape shape, Vec params)
    : shape_(shape), params_(std::move(params)) {
  shape_.Validate();
  if (params_.size() != shape_.param_count()) {
    throw Error("network expects " + std::to_string(shape_.param_count()) +
                " parameters, got " + std::to_string(params_.size()));
  }
}

TinySegNet TinySegNet::Zeros(const NetShape& shape) {
  shape.Validate();
  return TinySegNet(shape, Vec(shape.param_count(), 0.0));
}

TinySegNet TinySegNet::Random(const NetShape& shape, Rng& rng) {
  TinySegNet net = Zeros(shape);
  const auto o = net.offsets();
  auto fill = [&](std::size_t begin, std::size_t end, double stddev) {
    for (std::size_t i = begin; i < end; ++i) net.params_[i] = rng.Normal(0.0, stddev);
  };
  fill(o.w1, o.b1, std::sqrt(2.0 / shape.input_size()));
  for (std::size_t i = o.b1; i < o.w2; ++i) net.params_[i] = 0.05;
  fill(o.w2, o.b2, std::sqrt(2.0 / shape.hidden));
  for (std::size_t i = o.b2; i < o.w3; ++i) net.params_[i] = 0.05;
  fill(o.w3, o.b3, std::sqrt(1.0 / shape.features));
  return net;
}

TinySegNet::Offsets TinySegNet::offsets() const {
  Offsets o{};
  const std::size_t in = shape_.input_size();
  o.w1 = 0;
  o.b1 = o.w1 + static_cast<std::size_t>(shape_.hidden) * in;
  o.w2 = o.b1 + shape_.hidden;
  o.b2 = o.w2 + static_cast<std::size_t>(shape_.features) * shape_.hidden;
  o.w3 = o.b2 + shape_.features;
  o.b3 = o.w3 + static_cast<std::size_t>(shape_.classes) * shape_.features;
  o.end = o.b3 + shape_.classes;
  return o;
}

ForwardCache TinySegNet::Forward(const Image& image) const {
  const int win = shape_.window;
  if (image.channels != shape_.in_channels) {
    throw Error("image has " + std::to_string(image.channels) + " channels, network expects " +
                std::to_string(shape_.in_channels));
  }
  if (image.height % win != 0 || image.width % win != 0) {
    throw Error("image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                " is not divisible by window " + std::to_string(win));
  }
  const int lh = image.height / win, lw = image.width / win;
  const std::size_t cells = static_cast<std::size_t>(lh) * lw;
  const std::size_t in = shape_.input_size();
  const std::size_t hid = shape_.hidden, k = shape_.features, nc = shape_.classes;
  const auto o = offsets();
  const double* w1 = params_.data() + o.w1;
  const double* b1 = params_.data() + o.b1;
  const double* w2 = params_.data() + o.w2;
  const double* b2 = params_.data() + o.b2;
  const double* w3 = params_.data() + o.w3;
  const double* b3 = params_.data() + o.b3;

  ForwardCache cache;
  cache.height = image.height;
  cache.width = image.width;
  cache.inputs.resize(cells * in);
  cache.hidden_pre.resize(cells * hid);
  cache.feature_pre.resize(cells * k);
  cache.features = FeatureMap(lh, lw, static_cast<int>(k));
  cache.latent_logits = Tensor({static_cast<std::size_t>(lh), static_cast<std::size_t>(lw), nc});

  std::vector<double> hidden(hid);
  for (int r = 0; r < lh; ++r) {
    for (int c = 0; c < lw; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r) * lw + c;
      double* x = cache.inputs.data() + cell * in;
      std::size_t idx = 0;
      for (int dr = 0; dr < win; ++dr) {
        for (int dc = 0; dc < win; ++dc) {
          for (int ch = 0; ch < image.channels; ++ch) {
            x[idx++] = image.at(r * win + dr, c * win + dc, ch) - kInputCentre;
          }
        }
      }
      double* hp = cache.hidden_pre.data() + cell * hid;
      for (std::size_t j = 0; j < hid; ++j) {
        double s = b1[j];
        const double* row = w1 + j * in;
        for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
        hp[j] = s;
        hidden[j] = s > 0.0 ? s : 0.0;
      }
      double* fp = cache.feature_pre.data() + cell * k;
      auto feat = cache.features.at(r, c);
      for (std::size_t j = 0; j < k; ++j) {
        double s = b2[j];
        const double* row = w2 + j * hid;
        for (std::size_t i = 0; i < hid; ++i) s += row[i] * hidden[i];
        fp[j] = s;
        feat[j] = s > 0.0 ? s : 0.0;
      }
      for (std::size_t j = 0; j < nc; ++j) {
        double s = b3[j];
        const double* row = w3 + j * k;
        for (std::size_t i = 0; i < k; ++i) s += row[i] * feat[i];
        cache.latent_logits[cell * nc + j] = s;
      }
    }
  }

  cache.probs = Tensor({static_cast<std::size_t>(image.height),
                        static_cast<std::size_t>(image.width), nc});
  for (int r = 0; r < lh; ++r) {
    for (int c = 0; c < lw; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r) * lw + c;
      const Vec p = SoftmaxVec(std::span<const double>(
          cache.latent_logits.data().data() + cell * nc, nc));
      for (int dr = 0; dr < win; ++dr) {
        for (int dc = 0; dc < win; ++dc) {
          const std::size_t px =
              static_cast<std::size_t>(r * win + dr) * image.width + (c * win + dc);
          std::copy(p.begin(), p.end(), cache.probs.data().begin() + px * nc);
        }
      }
    }
  }
  return cache;
}

Vec TinySegNet::Backward(const ForwardCache& cache, const Tensor* feature_grad,
                         const Tensor* logit_grad) const {
  const int win = shape_.window;
  const int lh = cache.features.height(), lw = cache.features.width();
  const std::size_t cells = static_cast<std::size_t>(lh) * lw;
  const std::size_t in = shape_.input_size();
  const std::size_t hid = shape_.hidden, k = shape_.features, nc = shape_.classes;
  const auto o = offsets();
  const double* w2 = params_.data() + o.w2;
  const double* w3 = params_.data() + o.w3;

  if (feature_grad && feature_grad->size() != cells * k) {
    throw Error("feature gradient " + feature_grad->ShapeString() +
                " does not match the latent map");
  }
  if (logit_grad && logit_grad->size() !=
                        static_cast<std::size_t>(cache.height) * cache.width * nc) {
    throw Error("logit gradient " + logit_grad->ShapeString() +
                " does not match the output map");
  }

  Vec grads(params_.size(), 0.0);
  double* gw1 = grads.data() + o.w1;
  double* gb1 = grads.data() + o.b1;
  double* gw2 = grads.data() + o.w2;
  double* gb2 = grads.data() + o.b2;
  double* gw3 = grads.data() + o.w3;
  double* gb3 = grads.data() + o.b3;

  std::vector<double> dlogit(nc), dfeat(k), dhidden(hid), hidden(hid);
  for (int r = 0; r < lh; ++r) {
    for (int c = 0; c < lw; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r) * lw + c;
      std::fill(dlogit.begin(), dlogit.end(), 0.0);
      if (logit_grad) {
        // Each latent logit feeds every pixel of its window.
        for (int dr = 0; dr < win; ++dr) {
          for (int dc = 0; dc < win; ++dc) {
            const std::size_t px =
                static_cast<std::size_t>(r * win + dr) * cache.width + (c * win + dc);
            for (std::size_t j = 0; j < nc; ++j) dlogit[j] += (*logit_grad)[px * nc + j];
          }
        }
      }
      const auto feat = cache.features.at(r, c);
      for (std::size_t i = 0; i < k; ++i) {
        dfeat[i] = feature_grad ? (*feature_grad)[cell * k + i] : 0.0;
      }
      for (std::size_t j = 0; j < nc; ++j) {
        gb3[j] += dlogit[j];
        double* row = gw3 + j * k;
        const double* wrow = w3 + j * k;
        for (std::size_t i = 0; i < k; ++i) {
          row[i] += dlogit[j] * feat[i];
          dfeat[i] += dlogit[j] * wrow[i];
        }
      }
      const double* fp = cache.feature_pre.data() + cell * k;
      const double* hp = cache.hidden_pre.data() + cell * hid;
      for (std::size_t i = 0; i < hid; ++i) hidden[i] = hp[i] > 0.0 ? hp[i] : 0.0;
      std::fill(dhidden.begin(), dhidden.end(), 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        const double d = fp[j] > 0.0 ? dfeat[j] : 0.0;
        if (d == 0.0) continue;
        gb2[j] += d;
        double* row = gw2 + j * hid;
        const double* wrow = w2 + j * hid;
        for (std::size_t i = 0; i < hid; ++i) {
          row[i] += d * hidden[i];
          dhidden[i] += d * wrow[i];
        }
      }
      const double* x = cache.inputs.data() + cell * in;
      for (std::size_t j = 0; j < hid; ++j) {
        const double d = hp[j] > 0.0 ? dhidden[j] : 0.0;
        if (d == 0.0) continue;
        gb1[j] += d;
        double* row = gw1 + j * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
      }
    }
  }
  return grads;
}

LabelMap TinySegNet::Predict(const Image& image, int void_id) const {
  const ForwardCache cache = Forward(image);
  const int win = shape_.window;
  const std::size_t nc = shape_.classes;
  LabelMap out(image.height, image.width, void_id, void_id);
  const int lw = cache.features.width();
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r / win) * lw + c / win;
      const double* logits = cache.latent_logits.data().data() + cell * nc;
      out.at(r, c) = static_cast<int>(std::max_element(logits, logits + nc) - logits);
    }
  }
  return out;
}

double TinySegNet::ReluMargin(const ForwardCache& cache) {
  double margin = std::numeric_limits<double>::infinity();
  for (double v : cache.hidden_pre) margin = std::min(margin, std::abs(v));
  for (double v : cache.feature_pre) margin = std::min(margin, std::abs(v));
  return margin;
}

}  // namespace lsr
