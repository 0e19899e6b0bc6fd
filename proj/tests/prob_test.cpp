// Copyright 2026 The relaykey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "relaykey/prob.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "relaykey/random.hpp"
#include "relaykey/selftest.hpp"

namespace relaykey {
namespace {

// Binary entropy values computed to 40 digits with mpmath.
constexpr double kH01 = 0.4689955935892812;
constexpr double kH02 = 0.7219280948873623;

ErrorCode CodeOf(const std::optional<Error>& e) { return e ? e->code() : ErrorCode::kTypeError; }

TEST(ValidateTest, UniformIsValid) {
  EXPECT_FALSE(Validate(UniformJoint({2, 2})).has_value());
}

TEST(ValidateTest, DetectsNotNormalized) {
  auto j = FiniteJoint::Unchecked({2, 2}, {0.2, 0.2, 0.2, 0.3});
  EXPECT_EQ(CodeOf(Validate(j)), ErrorCode::kNotNormalized);
}

TEST(ValidateTest, DetectsNegativeMass) {
  auto j = FiniteJoint::Unchecked({2, 2}, {-0.1, 0.4, 0.4, 0.3});
  EXPECT_EQ(CodeOf(Validate(j)), ErrorCode::kNegativeMass);
}

TEST(ValidateTest, DetectsShapeMismatch) {
  auto j = FiniteJoint::Unchecked({2, 3}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_EQ(CodeOf(Validate(j)), ErrorCode::kShapeMismatch);
}

TEST(ValidateTest, ConstructorThrows) {
  try {
    FiniteJoint({2}, {0.5, 0.6});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotNormalized);
  }
}

TEST(ValidateTest, MemoryCap) {
  try {
    FiniteJoint({1000, 1000, 1000}, std::vector<double>{}, {}, 1'000'000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMemoryCapExceeded);
  }
}

TEST(ChannelTest, RowsMustSumToOne) {
  EXPECT_THROW(CondChannel({2}, {2}, {0.5, 0.5, 0.5, 0.6}), Error);
  EXPECT_NO_THROW(CondChannel({2}, {2}, {0.5, 0.5, 0.1, 0.9}));
}

TEST(EntropyTest, Examples) {
  EXPECT_NEAR(Entropy(Bernoulli(0.5), {0}), 1.0, 1e-15);
  EXPECT_NEAR(Entropy(Bernoulli(0.1), {0}), kH01, 1e-15);
  EXPECT_EQ(Entropy(Bernoulli(0.0), {0}), 0.0);
  EXPECT_NEAR(Entropy(UniformJoint({2, 4}), {0, 1}), 3.0, 1e-15);
  EXPECT_THROW(Entropy(Bernoulli(0.5), {1}), Error);
}

TEST(MutualInformationTest, DoublySymmetricSource) {
  EXPECT_NEAR(MutualInformation(Dsbs(0.1), {0}, {1}), 1.0 - kH01, 1e-14);
  EXPECT_NEAR(MutualInformation(Dsbs(0.2), {0}, {1}), 1.0 - kH02, 1e-14);
  EXPECT_NEAR(MutualInformation(Dsbs(0.5), {0}, {1}), 0.0, 1e-15);
  EXPECT_NEAR(ConditionalEntropy(Dsbs(0.1), {1}, {0}), kH01, 1e-14);
}

TEST(MutualInformationTest, Errors) {
  const auto j = Dsbs(0.1);
  try {
    MutualInformation(j, {0}, {0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOverlappingGroups);
  }
  try {
    MutualInformation(j, {0}, {2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadIndex);
  }
}

TEST(MarginalTest, SumsOut) {
  const auto j = CommonMarkovSource(0.1, 0.2);
  const auto z = Marginal(j, {2});
  EXPECT_NEAR(z[0], 0.5, 1e-15);
  EXPECT_NEAR(z[1], 0.5, 1e-15);
  const auto zx = Marginal(j, {2, 0});
  EXPECT_EQ(zx.labels()[0], "Z");
  // P(Z=0, X=1) = 0.5 * 0.1.
  EXPECT_NEAR(zx.at(std::vector<std::size_t>{0, 1}), 0.05, 1e-15);
}

TEST(ExtendMarkovTest, MatchesProductFormula) {
  const auto src = Dsbs(0.1);
  const auto c1 = BinarySymmetricChannel(0.2);
  const CondChannel c2({2}, {3}, {0.1, 0.2, 0.7, 0.5, 0.5, 0.0});
  const auto j = ExtendMarkov(src, c1, c2);
  ASSERT_EQ(j.sizes(), (std::vector<std::size_t>{2, 2, 2, 3}));
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t u = 0; u < 2; ++u) {
        for (std::size_t v = 0; v < 3; ++v) {
          const double want = src.at(std::vector<std::size_t>{x, y}) * c1(x, u) * c2(y, v);
          EXPECT_DOUBLE_EQ(j.at(std::vector<std::size_t>{x, y, u, v}), want);
        }
      }
    }
  }
  // Markov chain U1 - X - Y - U2.
  EXPECT_NEAR(MutualInformation(j, {2}, {1, 3}, {0}), 0.0, 1e-14);
  EXPECT_NEAR(MutualInformation(j, {3}, {0, 2}, {1}), 0.0, 1e-14);
}

TEST(PropertyTest, RandomJointsSatisfyIdentities) {
  Rng rng(DeriveSeed(11, Stream::kSelftest));
  for (int i = 0; i < 300; ++i) {
    const auto j = RandomJoint(
        {RandomSize(rng, 1, 4), RandomSize(rng, 1, 3), RandomSize(rng, 1, 3)}, rng, 0.3);
    ASSERT_FALSE(Validate(j).has_value());
    // Nonnegativity.
    EXPECT_GE(MutualInformation(j, {0}, {1}), -1e-12);
    EXPECT_GE(MutualInformation(j, {0}, {1}, {2}), -1e-12);
    // Chain rule for mutual information.
    EXPECT_NEAR(MutualInformation(j, {0}, {1, 2}),
                MutualInformation(j, {0}, {1}) + MutualInformation(j, {0}, {2}, {1}), 1e-10);
    // Symmetry.
    EXPECT_NEAR(MutualInformation(j, {0}, {2}), MutualInformation(j, {2}, {0}), 1e-12);
    // Marginals preserve mass.
    const auto m = Marginal(j, {1});
    double s = 0.0;
    for (double p : m.probs()) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
    // Entropy bounded by log of the support.
    EXPECT_LE(Entropy(j, {0}), std::log2(static_cast<double>(j.sizes()[0])) + 1e-12);
  }
}

TEST(PropertyTest, DataProcessing) {
  Rng rng(DeriveSeed(12, Stream::kSelftest));
  for (int i = 0; i < 300; ++i) {
    const std::size_t nx = RandomSize(rng, 1, 4), ny = RandomSize(rng, 1, 4);
    const auto src = RandomJoint({nx, ny}, rng, 0.2);
    const auto w = RandomChannel({ny}, RandomSize(rng, 1, 4), rng, 0.2);
    const auto j = ExtendMarkov(src, ConstantChannel({nx}), w);
    EXPECT_LE(MutualInformation(j, {0}, {3}), MutualInformation(j, {0}, {1}) + 1e-12);
  }
}

}  // namespace
}  // namespace relaykey
