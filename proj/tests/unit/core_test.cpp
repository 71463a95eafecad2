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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "lsr/core.hpp"
#include "lsr/io.hpp"
#include "lsr/rng.hpp"

namespace lsr {
namespace {

// Reference SplitMix64 finalizer, written out from the published algorithm.
std::uint64_t SplitMix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TEST(TensorOps, OrthogonalDotIsZero) {
  EXPECT_EQ(Dot(Tensor({2}, {1, 0}), Tensor({2}, {0, 1})), 0.0);
}

TEST(TensorOps, SoftmaxOfEqualLogitsIsUniform) {
  const Tensor s = Softmax(Tensor({2}, {0, 0}), 0);
  EXPECT_DOUBLE_EQ(s[0], 0.5);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
}

TEST(TensorOps, ThreeFourFiveNorms) {
  const Tensor v({2}, {3, -4});
  EXPECT_DOUBLE_EQ(L1Norm(v), 7.0);
  EXPECT_DOUBLE_EQ(L2Norm(v), 5.0);
}

TEST(TensorOps, ElementwiseArithmetic) {
  const Tensor a({3}, {1, 2, 3});
  const Tensor b({3}, {4, 5, 6});
  EXPECT_EQ(Add(a, b), Tensor({3}, {5, 7, 9}));
  EXPECT_EQ(Sub(b, a), Tensor({3}, {3, 3, 3}));
  EXPECT_EQ(Mul(a, b), Tensor({3}, {4, 10, 18}));
  EXPECT_EQ(Scale(a, 2.0), Tensor({3}, {2, 4, 6}));
}

TEST(TensorOps, ShapeMismatchNamesBothShapes) {
  try {
    Add(Tensor({2, 3}), Tensor({3, 2}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3x2"), std::string::npos) << msg;
  }
}

TEST(TensorOps, SoftmaxRowsAreDistributions) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.UniformInt(std::uint64_t{5});
    const std::size_t cols = 2 + rng.UniformInt(std::uint64_t{6});
    Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.Normal(0.0, 5.0);
    const Tensor s = Softmax(t, 1);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double p = s[r * cols + c];
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
        sum += p;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(TensorOps, SoftmaxOverLeadingAxis) {
  // Columns of a 2x2 tensor are the distributions when axis = 0.
  const Tensor s = Softmax(Tensor({2, 2}, {0, 1, 0, 1}), 0);
  EXPECT_DOUBLE_EQ(s[0] + s[2], 1.0);
  EXPECT_DOUBLE_EQ(s[0], 0.5);
}

TEST(TensorOps, ReductionsAreRepeatable) {
  Rng rng(3);
  Vec v(10007);
  for (double& x : v) x = rng.Normal();
  const double first = Sum(v);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(Sum(v), first);
    EXPECT_EQ(L2Norm(v), L2Norm(v));
  }
}

TEST(Rng, MatchesReferenceSplitMix) {
  Rng rng(0);
  EXPECT_EQ(rng.NextU64(), 0xE220A8397B1DCDAFULL);
  const std::uint64_t seed = 123456789;
  Rng r(seed);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(r.NextU64(), SplitMix(seed + (i + 1) * 0x9E3779B97F4A7C15ULL));
  }
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(a.Uniform(), b.Uniform());
    EXPECT_EQ(a.Normal(), b.Normal());
  }
}

TEST(Rng, ForksAreIndependentOfParentProgress) {
  Rng a(5);
  const Rng fork_before = a.Fork(9);
  a.NextU64();
  Rng f1 = fork_before;
  Rng f2 = a.Fork(9);
  EXPECT_EQ(f1.NextU64(), f2.NextU64());
  EXPECT_NE(Rng(5).Fork(1).NextU64(), Rng(5).Fork(2).NextU64());
}

TEST(Rng, UniformIntStaysInRange) {
  Rng rng(8);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.UniformInt(std::uint64_t{7});
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
  for (int i = 0; i < 1000; ++i) {
    const int k = rng.UniformInt(-2, 2);
    EXPECT_GE(k, -2);
    EXPECT_LE(k, 2);
  }
}

TEST(ClassSet, RejectsVoidInsideClassRange) {
  EXPECT_THROW(ClassSet({"a", "b"}, 1), Error);
  EXPECT_THROW(ClassSet({"a", "a"}, 255), Error);
  const ClassSet c = ClassSet::Numbered(3);
  EXPECT_EQ(c.size(), 3);
  EXPECT_EQ(c.name(2), "c2");
  EXPECT_TRUE(c.is_valid_label(255));
  EXPECT_FALSE(c.is_valid_label(3));
}

TEST(LabelMap, ValidateRejectsUnknownIds) {
  const ClassSet c = ClassSet::Numbered(2);
  LabelMap ok(2, 2, 255, std::vector<int>{0, 1, 255, 0});
  EXPECT_NO_THROW(ok.Validate(c));
  LabelMap bad(2, 2, 255, std::vector<int>{0, 2, 255, 0});
  EXPECT_THROW(bad.Validate(c), Error);
}

TEST(FeatureMap, ValidateRejectsNegativeAndNonFinite) {
  EXPECT_NO_THROW(FeatureMap(1, 1, 2, {0.0, 1.5}).Validate());
  EXPECT_THROW(FeatureMap(1, 1, 2, {-0.1, 1.5}).Validate(), Error);
  EXPECT_THROW(FeatureMap(1, 1, 2, {NAN, 1.5}).Validate(), Error);
}

TEST(Serialization, LabelMapRoundTrip) {
  const LabelMap labels(2, 3, 255, std::vector<int>{0, 1, 2, 255, 1, 0});
  std::stringstream ss;
  io::WriteLabelMap(ss, labels);
  EXPECT_EQ(ss.str().rfind("LSRLABEL\n3 2 255\n", 0), 0u) << ss.str();
  EXPECT_EQ(io::ReadLabelMap(ss), labels);
}

TEST(Serialization, FeatureMapRoundTripIsExact) {
  Rng rng(2);
  FeatureMap f(3, 2, 4);
  for (double& x : f.data()) x = rng.Uniform() * 1e3;
  std::stringstream ss;
  io::WriteFeatureMap(ss, f);
  EXPECT_EQ(ss.str().rfind("LSRFEAT\n3 2 4\n", 0), 0u);
  EXPECT_EQ(io::ReadFeatureMap(ss), f);
}

TEST(Serialization, ImageRoundTripIsExact) {
  Rng rng(4);
  Image img(2, 3, 3);
  for (double& x : img.data) x = rng.Uniform();
  std::stringstream ss;
  io::WriteImage(ss, img);
  EXPECT_EQ(io::ReadImage(ss), img);
}

TEST(Serialization, TruncatedInputIsAnError) {
  std::stringstream ss("LSRLABEL\n2 2 255\n0 1\n");
  EXPECT_THROW(io::ReadLabelMap(ss), Error);
  std::stringstream bad_magic("LSRFEATX\n1 1 1\n0\n");
  EXPECT_THROW(io::ReadFeatureMap(bad_magic), Error);
}

}  // namespace
}  // namespace lsr
