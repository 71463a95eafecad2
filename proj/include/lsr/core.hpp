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

#ifndef LSR_CORE_HPP_
#define LSR_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsr {

// All library failures surface as this exception type; the CLI maps it to
// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

enum class Domain { kSource, kTarget };

const char* DomainName(Domain domain);

// Set of semantic classes. Ids are 0..num_classes-1, void_id lies outside.
class ClassSet {
 public:
  ClassSet() = default;
  ClassSet(std::vector<std::string> names, int void_id = 255);

  // Names "c0".."c{n-1}".
  static ClassSet Numbered(int num_classes, int void_id = 255);

  int size() const { return static_cast<int>(names_.size()); }
  int void_id() const { return void_id_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int id) const { return names_.at(id); }
  bool is_class(int id) const { return id >= 0 && id < size(); }
  bool is_valid_label(int id) const { return is_class(id) || id == void_id_; }

 private:
  std::vector<std::string> names_;
  int void_id_ = 255;
};

// Dense integer grid of class ids (or the void sentinel), row-major.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int height, int width, int void_id, int fill);
  LabelMap(int height, int width, int void_id, std::vector<int> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int void_id() const { return void_id_; }
  std::size_t size() const { return data_.size(); }

  int at(int row, int col) const { return data_[index(row, col)]; }
  int& at(int row, int col) { return data_[index(row, col)]; }
  const std::vector<int>& data() const { return data_; }

  bool is_void(int row, int col) const { return at(row, col) == void_id_; }

  // Throws unless every cell is a class of `classes` or the void id.
  void Validate(const ClassSet& classes) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int height_ = 0;
  int width_ = 0;
  int void_id_ = 255;
  std::vector<int> data_;
};

// Row-major real tensor with an arbitrary shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::string ShapeString() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double s);
double Dot(const Tensor& a, const Tensor& b);
double L1Norm(const Tensor& a);
double L2Norm(const Tensor& a);
// Softmax along `axis`; other axes index independent distributions.
Tensor Softmax(const Tensor& a, std::size_t axis);

// Span kernels shared by the hot loops. Reductions run front to back.
double Dot(std::span<const double> a, std::span<const double> b);
double L1Norm(std::span<const double> a);
double L2Norm(std::span<const double> a);
double Sum(std::span<const double> a);
double Mean(std::span<const double> a);
double Distance(std::span<const double> a, std::span<const double> b);
Vec SoftmaxVec(std::span<const double> logits);

// Encoder output: one non-negative K-vector per latent cell.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels);
  FeatureMap(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t cells() const { return static_cast<std::size_t>(height_) * width_; }

  std::span<const double> at(int row, int col) const {
    return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
  }
  std::span<double> at(int row, int col) {
    return {data_.data() + offset(row, col), static_cast<std::size_t>(channels_)};
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  // Throws on negative or non-finite entries.
  void Validate() const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// RGB-style image, row-major with interleaved channels.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace lsr

#endif  // LSR_CORE_HPP_
