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

#include "relaykey/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"

namespace relaykey {
namespace {

double H2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

double Conv(double a, double b) { return a * (1 - b) + b * (1 - a); }

// Closed form for DSBS(p) with U1 = X xor Bern(a), U2 = Y xor Bern(b).
struct BscPoint {
  double r1, r2, rk;
};

BscPoint DsbsBscPoint(double p, double a, double b) {
  return {H2(Conv(p, a)) - H2(a), H2(Conv(p, b)) - H2(b),
          1.0 - H2(Conv(p, a)) - H2(Conv(p, b)) + H2(Conv(Conv(a, b), p))};
}

TEST(BscClosedFormTest, MatchesInnerPoint) {
  for (double a : {0.0, 0.05, 0.3}) {
    for (double b : {0.1, 0.25, 0.5}) {
      const auto want = DsbsBscPoint(0.1, a, b);
      const auto got =
          InnerPoint(Dsbs(0.1), BinarySymmetricChannel(a), BinarySymmetricChannel(b));
      EXPECT_NEAR(got.point.r1, want.r1, 1e-12);
      EXPECT_NEAR(got.point.r2, want.r2, 1e-12);
      EXPECT_NEAR(got.point.rk, std::max(0.0, want.rk), 1e-12);
    }
  }
}

OptimizerConfig FastConfig() {
  OptimizerConfig cfg;
  cfg.restarts = 8;
  cfg.max_iters = 100;
  cfg.grid_resolution = 21;
  return cfg;
}

TEST(MaxKeyRateInnerTest, IndependentSourceGivesZero) {
  const auto o = MaxKeyRateInner(UniformJoint({2, 3}), RateCaps{}, FastConfig());
  EXPECT_NEAR(o.best_rk, 0.0, 1e-12);
}

TEST(MaxKeyRateInnerTest, UnboundedReachesMutualInformation) {
  const auto o = MaxKeyRateInner(Dsbs(0.1), RateCaps{}, FastConfig());
  EXPECT_GE(o.best_rk, 1.0 - H2(0.1) - 0.01);
  EXPECT_LE(o.best_rk, 1.0 - H2(0.1) + 1e-10);
}

TEST(MaxKeyRateInnerTest, CappedBeatsBscGrid) {
  const double cap = 0.1;
  double oracle = 0.0;
  for (int i = 0; i <= 25; ++i) {
    for (int j = 0; j <= 25; ++j) {
      const auto q = DsbsBscPoint(0.1, 0.02 * i, 0.02 * j);
      if (q.r1 <= cap && q.r2 <= cap) oracle = std::max(oracle, q.rk);
    }
  }
  ASSERT_GT(oracle, 0.0);
  const auto o = MaxKeyRateInner(Dsbs(0.1), RateCaps{cap, cap, cap}, OptimizerConfig{});
  EXPECT_GE(o.best_rk, oracle - 0.005);
  EXPECT_LE(o.evaluation.point.r1, cap);
  EXPECT_LE(o.evaluation.point.r2, cap);
  EXPECT_LE(o.evaluation.point.rc, cap);
}

TEST(MaxKeyRateInnerTest, MonotoneInCaps) {
  double prev = 0.0;
  for (double cap : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const auto o = MaxKeyRateInner(Dsbs(0.2), RateCaps{cap, cap, cap}, FastConfig());
    EXPECT_GE(o.best_rk, prev - 1e-6) << "cap=" << cap;
    prev = std::max(prev, o.best_rk);
  }
}

TEST(MaxKeyRateInnerTest, Deterministic) {
  const auto a = MaxKeyRateInner(Dsbs(0.2), RateCaps{0.2, 0.2, 0.2}, FastConfig());
  const auto b = MaxKeyRateInner(Dsbs(0.2), RateCaps{0.2, 0.2, 0.2}, FastConfig());
  EXPECT_EQ(a.best_rk, b.best_rk);
  EXPECT_EQ(a.ch1, b.ch1);
  EXPECT_EQ(a.ch2, b.ch2);
  ASSERT_EQ(a.search.restarts.size(), b.search.restarts.size());
}

TEST(MaxKeyRateInnerTest, RejectsBadConfig) {
  OptimizerConfig cfg;
  cfg.restarts = 0;
  EXPECT_THROW(MaxKeyRateInner(Dsbs(0.1), RateCaps{}, cfg), Error);
  EXPECT_THROW(MaxKeyRateInner(Dsbs(0.1), RateCaps{-1, 1, 1}, OptimizerConfig{}), Error);
}

TEST(MaxKeyRateCommonTest, ConditionallyIndependentSource) {
  const auto o = MaxKeyRateCommon(CommonMarkovSource(0.1, 0.2), RateCaps{}, FastConfig());
  EXPECT_GE(o.best_rk, 1.0 - 0.005);
}

TEST(MaxKeyRateTrustedTest, UnboundedReachesMutualInformation) {
  const auto o = MaxKeyRateTrusted(Dsbs(0.1), kUnbounded, FastConfig());
  EXPECT_GE(o.best_rk, 1.0 - H2(0.1) - 0.01);
}

TEST(MaxKeyRateTrustedTest, ZeroCapGivesZero) {
  const auto o = MaxKeyRateTrusted(Dsbs(0.1), 0.0, FastConfig());
  EXPECT_NEAR(o.best_rk, 0.0, 1e-9);
}

TEST(TraceInnerBoundaryTest, NondecreasingAndWithinCaps) {
  const std::vector<double> caps{0.05, 0.1, 0.2, 0.3};
  const auto t = TraceInnerBoundary(Dsbs(0.2), caps, FastConfig());
  ASSERT_EQ(t.size(), caps.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_LE(std::max({t[i].point.r1, t[i].point.r2, t[i].point.rc}), caps[i] + 1e-12);
    if (i > 0) {
      EXPECT_GE(t[i].point.rk, t[i - 1].point.rk - 1e-12);
    }
  }
}

TEST(ProjectToSimplexTest, Basics) {
  const auto p = internal::ProjectToSimplex({0.5, 0.5, 0.5});
  for (double x : p) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  const auto q = internal::ProjectToSimplex({2.0, -1.0});
  EXPECT_EQ(q[0], 1.0);
  EXPECT_EQ(q[1], 0.0);
}

}  // namespace
}  // namespace relaykey
