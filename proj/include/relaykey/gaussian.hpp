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

// Closed-form rates for jointly Gaussian sources with unit variances and
// correlation rho, using additive Gaussian test channels U_i = source + Q_i.

#ifndef RELAYKEY_GAUSSIAN_HPP_
#define RELAYKEY_GAUSSIAN_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "relaykey/error.hpp"
#include "relaykey/rate_regions.hpp"

namespace relaykey {

struct GaussianParams {
  double rho = 0.0;
  double nq1 = 1.0;  // variance of Q1
  double nq2 = 1.0;  // variance of Q2
};

namespace internal {

inline void CheckRho(double rho, bool allow_one) {
  if (!(rho >= 0.0) || rho > 1.0 || (!allow_one && rho == 1.0)) {
    throw Error(ErrorCode::kDomainError,
                allow_one ? "rho must lie in [0, 1]" : "rho must lie in [0, 1)");
  }
}

inline void CheckRate(double r, const char* name) {
  if (!(r >= 0.0)) {
    throw Error(ErrorCode::kDomainError, std::string(name) + " must be >= 0");
  }
}

// 0.5 * log2((1 - rho^2 * 2^{-2 m}) / (1 - rho^2)); m may be +inf.
inline double KeyRateForDescriptionRate(double rho, double m) {
  const double r2 = rho * rho;
  return 0.5 * std::log2((1.0 - r2 * std::exp2(-2.0 * m)) / (1.0 - r2));
}

}  // namespace internal

inline void ValidateGaussian(const GaussianParams& p) {
  internal::CheckRho(p.rho, /*allow_one=*/true);
  if (!(p.nq1 > 0.0) || !(p.nq2 > 0.0) || !std::isfinite(p.nq1) ||
      !std::isfinite(p.nq2)) {
    throw Error(ErrorCode::kDomainError, "noise variances must be positive and finite");
  }
}

inline RatePoint GaussianInnerPoint(const GaussianParams& p) {
  ValidateGaussian(p);
  const double r2 = p.rho * p.rho;
  const double rate1 = 0.5 * std::log2((1.0 + p.nq1 - r2) / p.nq1);
  const double rate2 = 0.5 * std::log2((1.0 + p.nq2 - r2) / p.nq2);
  const double rk = 0.5 * std::log2(((1.0 + p.nq1) * (1.0 + p.nq2) - r2) /
                                    ((1.0 + p.nq1 - r2) * (1.0 + p.nq2 - r2)));
  return internal::MakePoint(rate1, rate2, rk);
}

// Test-channel noise making the description rate equal min(ri, rc). The
// zero-noise limit at infinite rate is not representable and raises
// DomainError.
inline double NoiseForRates(double rho, double ri, double rc) {
  internal::CheckRho(rho, /*allow_one=*/true);
  const double m = std::min(ri, rc);
  if (!(m > 0.0)) throw Error(ErrorCode::kDomainError, "min(ri, rc) must be > 0");
  if (std::isinf(m)) {
    throw Error(ErrorCode::kDomainError, "infinite rate: noise variance tends to 0");
  }
  return (1.0 - rho * rho) / (std::exp2(2.0 * m) - 1.0);
}

// Largest key rate of the relay scheme at link rates (r1, r2, rc).
inline double MaxKeyRateGaussian(double rho, double r1, double r2, double rc) {
  internal::CheckRho(rho, /*allow_one=*/false);
  internal::CheckRate(r1, "r1");
  internal::CheckRate(r2, "r2");
  internal::CheckRate(rc, "rc");
  return internal::KeyRateForDescriptionRate(rho, std::min(r1, rc) + std::min(r2, rc));
}

// Key capacity of one-way communication from user i to user j through the
// relay.
inline double OneWayCapacity(double rho, double ri, double rc) {
  internal::CheckRho(rho, /*allow_one=*/false);
  internal::CheckRate(ri, "ri");
  internal::CheckRate(rc, "rc");
  return internal::KeyRateForDescriptionRate(rho, std::min(ri, rc));
}

// ---------------------------------------------------------------------------
// Sweeps comparing the relay key rate with time sharing of one-way schemes.

enum class SweepMode { kAlpha, kBeta };

struct SweepParams {
  double rho = 0.6;
  double r1 = 0.6;
  double r2 = 0.4;
  double rc = 1.0;
  // Beta mode: r1 = r2 = beta * rc for beta on [0, beta_max].
  double beta_max = 2.0;
  // Weight of C_{1->2} in C* for beta mode.
  double alpha = 0.5;
  int points = 101;
};

struct SweepRow {
  double x = 0.0;  // alpha or beta
  double rk = 0.0;
  double c1to2 = 0.0;
  double c2to1 = 0.0;
  double cstar = 0.0;
};

inline std::vector<SweepRow> Figure2Sweep(SweepMode mode, const SweepParams& p) {
  if (p.points < 2) throw Error(ErrorCode::kConfigInvalid, "points must be >= 2");
  if (mode == SweepMode::kBeta && !(p.beta_max > 0.0 && std::isfinite(p.beta_max))) {
    throw Error(ErrorCode::kConfigInvalid, "beta_max must be positive");
  }
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "alpha must lie in [0, 1]");
  }
  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(p.points));
  for (int i = 0; i < p.points; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(p.points - 1);
    SweepRow row;
    double r1 = p.r1, r2 = p.r2, alpha = p.alpha;
    if (mode == SweepMode::kAlpha) {
      row.x = frac;
      alpha = frac;
    } else {
      row.x = p.beta_max * frac;
      r1 = r2 = row.x * p.rc;
    }
    row.rk = MaxKeyRateGaussian(p.rho, r1, r2, p.rc);
    row.c1to2 = OneWayCapacity(p.rho, r1, p.rc);
    row.c2to1 = OneWayCapacity(p.rho, r2, p.rc);
    row.cstar = alpha * row.c1to2 + (1.0 - alpha) * row.c2to1;
    rows.push_back(row);
  }
  return rows;
}

inline std::string_view SweepHeader(SweepMode mode) {
  return mode == SweepMode::kAlpha ? "alpha,rk,c1to2,c2to1,cstar"
                                   : "beta,rk,c1to2,c2to1,cstar";
}

}  // namespace relaykey

#endif  // RELAYKEY_GAUSSIAN_HPP_
