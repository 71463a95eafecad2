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

#include "lsr/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace lsr {

const char* DomainName(Domain domain) {
  return domain == Domain::kSource ? "source" : "target";
}

ClassSet::ClassSet(std::vector<std::string> names, int void_id)
    : names_(std::move(names)), void_id_(void_id) {
  if (names_.empty()) throw Error("class set must contain at least one class");
  if (void_id_ >= 0 && void_id_ < size()) {
    throw Error("void id " + std::to_string(void_id_) +
                " collides with a class id");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw Error("duplicate class name '" + n + "'");
  }
}

ClassSet ClassSet::Numbered(int num_classes, int void_id) {
  if (num_classes <= 0) throw Error("class count must be positive");
  std::vector<std::string> names;
  for (int c = 0; c < num_classes; ++c) names.push_back("c" + std::to_string(c));
  return ClassSet(std::move(names), void_id);
}

LabelMap::LabelMap(int height, int width, int void_id, int fill)
    : height_(height), width_(width), void_id_(void_id),
      data_(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0), fill) {
  if (height <= 0 || width <= 0) throw Error("label map dimensions must be positive");
}

LabelMap::LabelMap(int height, int width, int void_id, std::vector<int> data)
    : height_(height), width_(width), void_id_(void_id), data_(std::move(data)) {
  if (height <= 0 || width <= 0) throw Error("label map dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(height) * width) {
    throw Error("label map data size does not match " + std::to_string(height) +
                "x" + std::to_string(width));
  }
}

void LabelMap::Validate(const ClassSet& classes) const {
  if (void_id_ != classes.void_id()) throw Error("label map void id differs from class set");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!classes.is_valid_label(data_[i])) {
      throw Error("invalid label " + std::to_string(data_[i]) + " at cell " +
                  std::to_string(i));
    }
  }
}

namespace {

std::size_t Product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(std::string(op) + ": shape mismatch " + a.ShapeString() + " vs " +
                b.ShapeString());
  }
}

template <typename F>
Tensor Zip(const Tensor& a, const Tensor& b, const char* op, F f) {
  RequireSameShape(a, b, op);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(Product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != Product(shape_)) {
    throw Error("tensor data size " + std::to_string(data_.size()) +
                " does not match shape " + ShapeString());
  }
}

std::string Tensor::ShapeString() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ')';
  return os.str();
}

Tensor Add(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "add", [](double x, double y) { return x + y; });
}
Tensor Sub(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "sub", [](double x, double y) { return x - y; });
}
Tensor Mul(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor Scale(const Tensor& a, double s) {
  Tensor out = a;
  for (auto& x : out.data()) x *= s;
  return out;
}

double Dot(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "dot");
  return Dot(a.data(), b.data());
}

double L1Norm(const Tensor& a) { return L1Norm(a.data()); }
double L2Norm(const Tensor& a) { return L2Norm(a.data()); }

Tensor Softmax(const Tensor& a, std::size_t axis) {
  if (axis >= a.rank()) {
    throw Error("softmax axis " + std::to_string(axis) + " out of range for " +
                a.ShapeString());
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= a.dim(i);
  for (std::size_t i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);
  const std::size_t n = a.dim(axis);
  Tensor out(a.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      auto idx = [&](std::size_t k) { return (o * n + k) * inner + in; };
      double peak = a[idx(0)];
      for (std::size_t k = 1; k < n; ++k) peak = std::max(peak, a[idx(k)]);
      double z = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        out[idx(k)] = std::exp(a[idx(k)] - peak);
        z += out[idx(k)];
      }
      for (std::size_t k = 0; k < n; ++k) out[idx(k)] /= z;
    }
  }
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("dot: length mismatch (" + std::to_string(a.size()) + ") vs (" +
                std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double L1Norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return s;
}

double L2Norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

double Sum(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

double Mean(std::span<const double> a) {
  return a.empty() ? 0.0 : Sum(a) / static_cast<double>(a.size());
}

double Distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("distance: length mismatch (" + std::to_string(a.size()) +
                ") vs (" + std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Vec SoftmaxVec(std::span<const double> logits) {
  Vec out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double peak = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (auto& x : out) {
    x = std::exp(x - peak);
    z += x;
  }
  for (auto& x : out) x /= z;
  return out;
}

FeatureMap::FeatureMap(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels),
      data_(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0) *
                std::max(channels, 0),
            0.0) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw Error("feature map dimensions must be positive");
  }
}

FeatureMap::FeatureMap(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw Error("feature map dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw Error("feature map data size does not match " + std::to_string(height) +
                "x" + std::to_string(width) + "x" + std::to_string(channels));
  }
}

void FeatureMap::Validate() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]) || data_[i] < 0.0) {
      throw Error("feature map entry " + std::to_string(i) +
                  " is negative or non-finite");
    }
  }
}

}  // namespace lsr
