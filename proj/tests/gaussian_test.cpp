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

#include "relaykey/gaussian.hpp"

#include <cmath>

#include "gtest/gtest.h"

namespace relaykey {
namespace {

// Reference values computed to 40 digits with mpmath.
constexpr double kRk = 0.2538973200993481;     // rho 0.6, rates (0.6, 0.4, 1)
constexpr double kC12 = 0.1989877933191063;    // one-way, rate 0.6
constexpr double kC21 = 0.1548375749212868;    // one-way, rate 0.4
constexpr double kNoise = 0.4932955317906774;  // rho 0.6, rate 0.6
constexpr double kRateAt049329 = 0.6000045681819365;
constexpr double kKeyAt049329 = 0.2709692723664981;
constexpr double kKeyAtExactNoise = 0.2709686035890523;
constexpr double kUnboundedKey = 0.3219280948873624;  // 0.5 log2(1 / 0.64)

TEST(GaussianTest, KeyRateAndOneWayCapacities) {
  EXPECT_NEAR(MaxKeyRateGaussian(0.6, 0.6, 0.4, 1.0), kRk, 1e-13);
  EXPECT_NEAR(OneWayCapacity(0.6, 0.6, 1.0), kC12, 1e-13);
  EXPECT_NEAR(OneWayCapacity(0.6, 0.4, 1.0), kC21, 1e-13);
}

TEST(GaussianTest, NoiseForRates) {
  EXPECT_NEAR(NoiseForRates(0.6, 0.6, 1.0), kNoise, 1e-13);
  EXPECT_NEAR(NoiseForRates(0.6, 2.0, 0.6), kNoise, 1e-13);
  EXPECT_THROW(NoiseForRates(0.6, 0.0, 1.0), Error);
  EXPECT_THROW(NoiseForRates(0.6, kUnbounded, kUnbounded), Error);
}

TEST(GaussianTest, InnerPointAtGivenNoise) {
  const auto p = GaussianInnerPoint({0.6, 0.49329, 0.49329});
  EXPECT_NEAR(p.r1, kRateAt049329, 1e-13);
  EXPECT_NEAR(p.r2, kRateAt049329, 1e-13);
  EXPECT_NEAR(p.rc, kRateAt049329, 1e-13);
  EXPECT_NEAR(p.rk, kKeyAt049329, 1e-13);
}

TEST(GaussianTest, InnerPointMatchesKeyRateFormula) {
  const auto p = GaussianInnerPoint({0.6, kNoise, kNoise});
  EXPECT_NEAR(p.r1, 0.6, 1e-13);
  EXPECT_NEAR(p.rk, kKeyAtExactNoise, 1e-13);
  EXPECT_NEAR(MaxKeyRateGaussian(0.6, 0.6, 0.6, 1.0), kKeyAtExactNoise, 1e-13);
}

TEST(GaussianTest, UnboundedRatesGiveMutualInformation) {
  EXPECT_NEAR(MaxKeyRateGaussian(0.6, kUnbounded, kUnbounded, kUnbounded), kUnboundedKey,
              1e-15);
  EXPECT_EQ(MaxKeyRateGaussian(0.0, 1, 1, 1), 0.0);
  EXPECT_EQ(MaxKeyRateGaussian(0.6, 0, 0, 1), 0.0);
}

TEST(GaussianTest, DomainErrors) {
  try {
    MaxKeyRateGaussian(1.0, 1, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomainError);
  }
  EXPECT_THROW(OneWayCapacity(-0.1, 1, 1), Error);
  EXPECT_THROW(MaxKeyRateGaussian(0.5, -1, 1, 1), Error);
  EXPECT_THROW(GaussianInnerPoint({0.5, 0.0, 1.0}), Error);
}

TEST(SweepTest, AlphaModeBeatsTimeSharing) {
  const auto rows = Figure2Sweep(SweepMode::kAlpha, SweepParams{});
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows.front().x, 0.0);
  EXPECT_EQ(rows.back().x, 1.0);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.rk, kRk, 1e-13);
    EXPECT_NEAR(r.cstar, r.x * kC12 + (1 - r.x) * kC21, 1e-13);
    EXPECT_GT(r.rk, r.cstar);
  }
}

TEST(SweepTest, BetaModeSaturates) {
  SweepParams p;
  p.beta_max = 2.0;
  p.points = 201;
  const auto rows = Figure2Sweep(SweepMode::kBeta, p);
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows.back().x, 2.0);
  double saturated = MaxKeyRateGaussian(0.6, 1, 1, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].x < 1.0 && i > 0) {
      EXPECT_GT(rows[i].rk, rows[i - 1].rk);
    }
    if (rows[i].x >= 1.0) {
      EXPECT_EQ(rows[i].rk, saturated);
    }
  }
}

TEST(SweepTest, RejectsBadParameters) {
  SweepParams p;
  p.points = 1;
  EXPECT_THROW(Figure2Sweep(SweepMode::kAlpha, p), Error);
  p.points = 11;
  p.alpha = 1.5;
  EXPECT_THROW(Figure2Sweep(SweepMode::kBeta, p), Error);
}

TEST(SweepTest, Headers) {
  EXPECT_EQ(SweepHeader(SweepMode::kAlpha), "alpha,rk,c1to2,c2to1,cstar");
  EXPECT_EQ(SweepHeader(SweepMode::kBeta), "beta,rk,c1to2,c2to1,cstar");
}

}  // namespace
}  // namespace relaykey
