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

// Pointwise evaluation of the communication-key rate regions for secret key
// generation through a relay: the untrusted-relay inner and outer bounds, the
// inner bound for sources with a common part, the trusted-relay region and the
// reduced network-coding bound it is compared against.
//
// Variable order in every extended joint follows the construction helpers in
// prob.hpp: (X, Y, U1, U2), (X, Y, Z, U1, U2) or (X, Y, V).

#ifndef RELAYKEY_RATE_REGIONS_HPP_
#define RELAYKEY_RATE_REGIONS_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "relaykey/error.hpp"
#include "relaykey/prob.hpp"

namespace relaykey {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// (R1, R2, Rc, Rk) in bits per source symbol. Components are clamped at 0;
// rk_unclamped keeps the raw key-rate expression for diagnostics.
struct RatePoint {
  double r1 = 0.0;
  double r2 = 0.0;
  double rc = 0.0;
  double rk = 0.0;
  double rk_unclamped = 0.0;
};

struct InnerEvaluation {
  RatePoint point;
  // I(X,Y;U1,U2) - I(X;U1|Y) - I(Y;U2|X); equal to point.rk_unclamped under
  // the Markov structure.
  double rk_alternate = 0.0;
};

struct TrustedPoint {
  double rc = 0.0;
  double rk = 0.0;
};

struct ReducedPoint {
  double rc = 0.0;
  double rk = 0.0;
  // I(Y;U1,U2) - I(Y;U1,U2|X), the symmetric form of rk.
  double rk_alternate = 0.0;
};

enum class CardinalityCheck { kEnforce, kSkip };

namespace internal {

inline double ClampRate(double v) { return std::max(0.0, v); }

inline void CheckCardinality(std::size_t actual, std::size_t bound,
                             const char* what) {
  if (actual > bound) {
    throw Error(ErrorCode::kCardinalityExceeded,
                std::string(what) + " has " + std::to_string(actual) +
                    " symbols, bound is " + std::to_string(bound));
  }
}

inline RatePoint MakePoint(double r1, double r2, double rk) {
  RatePoint p;
  p.r1 = ClampRate(r1);
  p.r2 = ClampRate(r2);
  p.rc = std::max(p.r1, p.r2);
  p.rk_unclamped = rk;
  p.rk = ClampRate(rk);
  return p;
}

}  // namespace internal

// Extreme point of the untrusted-relay inner bound for product test channels
// P(U1|X) P(U2|Y): minimum link rates and the largest key rate.
inline InnerEvaluation InnerPoint(const FiniteJoint& source, const CondChannel& ch1,
                                  const CondChannel& ch2,
                                  CardinalityCheck check = CardinalityCheck::kEnforce) {
  if (source.arity() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y)");
  }
  if (check == CardinalityCheck::kEnforce) {
    internal::CheckCardinality(ch1.cols(), source.sizes()[0] + 1, "U1");
    internal::CheckCardinality(ch2.cols(), source.sizes()[1] + 1, "U2");
  }
  const FiniteJoint j = ExtendMarkov(source, ch1, ch2);
  constexpr std::size_t X = 0, Y = 1, U1 = 2, U2 = 3;
  const double r1 = MutualInformation(j, {X}, {U1}, {Y});
  const double r2 = MutualInformation(j, {Y}, {U2}, {X});
  const double rk = MutualInformation(j, {Y}, {U1}) + MutualInformation(j, {X}, {U2}) -
                    MutualInformation(j, {U1}, {U2});
  InnerEvaluation out;
  out.point = internal::MakePoint(r1, r2, rk);
  out.rk_alternate = MutualInformation(j, {X, Y}, {U1, U2}) - r1 - r2;
  return out;
}

// Outer bound evaluated at an arbitrary joint test channel P(U1,U2|X,Y)
// (inputs (X,Y), outputs (U1,U2)).
inline RatePoint OuterPoint(const FiniteJoint& source, const CondChannel& ch) {
  if (ch.output_sizes().size() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "outer bound channel must output (U1, U2)");
  }
  const FiniteJoint j = ExtendGeneral(source, ch);
  constexpr std::size_t X = 0, Y = 1, U1 = 2, U2 = 3;
  const double r1 = MutualInformation(j, {X}, {U1}, {Y});
  const double r2 = MutualInformation(j, {Y}, {U2}, {X});
  const double rk = MutualInformation(j, {X, Y}, {U1, U2}) - r1 - r2;
  return internal::MakePoint(r1, r2, rk);
}

// Inner bound when both users also observe a common component Z. Source is
// over (X, Y, Z); channels are P(U1|X,Z) and P(U2|Y,Z).
inline RatePoint CommonInnerPoint(const FiniteJoint& source, const CondChannel& ch1,
                                  const CondChannel& ch2,
                                  CardinalityCheck check = CardinalityCheck::kEnforce) {
  if (source.arity() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y, Z)");
  }
  const std::size_t nx = source.sizes()[0], ny = source.sizes()[1],
                    nz = source.sizes()[2];
  if (check == CardinalityCheck::kEnforce) {
    internal::CheckCardinality(ch1.cols(), nx * nz + 2, "U1");
    internal::CheckCardinality(ch2.cols(), ny * nz + 2, "U2");
  }
  const FiniteJoint j = ExtendMarkovCommon(source, ch1, ch2);
  constexpr std::size_t X = 0, Y = 1, Z = 2, U1 = 3, U2 = 4;
  const double r1 = MutualInformation(j, {X}, {U1}, {Y, Z});
  const double r2 = MutualInformation(j, {Y}, {U2}, {X, Z});
  const double rk = MutualInformation(j, {Y, Z}, {U1}) +
                    MutualInformation(j, {X, Z}, {U2}) -
                    MutualInformation(j, {U1}, {U2}) +
                    ConditionalEntropy(j, {Z}, {U1, U2});
  return internal::MakePoint(r1, r2, rk);
}

// Trusted relay that observes (X, Y) and broadcasts over a public link.
inline TrustedPoint TrustedRegionPoint(const FiniteJoint& source, const CondChannel& ch,
                                       CardinalityCheck check = CardinalityCheck::kEnforce) {
  if (source.arity() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y)");
  }
  if (check == CardinalityCheck::kEnforce) {
    internal::CheckCardinality(ch.cols(), source.size() + 2, "V");
  }
  const FiniteJoint j = ExtendGeneral(source, ch.Flattened());
  constexpr std::size_t X = 0, Y = 1, V = 2;
  TrustedPoint out;
  out.rc = internal::ClampRate(std::max(MutualInformation(j, {X}, {V}, {Y}),
                                        MutualInformation(j, {Y}, {V}, {X})));
  out.rk = internal::ClampRate(
      std::min(MutualInformation(j, {X}, {V}), MutualInformation(j, {Y}, {V})));
  return out;
}

// The untrusted-relay scheme specialized to unlimited uplinks.
inline ReducedPoint TrustedReducedInnerPoint(const FiniteJoint& source,
                                             const CondChannel& ch1,
                                             const CondChannel& ch2) {
  const FiniteJoint j = ExtendMarkov(source, ch1, ch2);
  constexpr std::size_t X = 0, Y = 1, U1 = 2, U2 = 3;
  const double x_given_y = MutualInformation(j, {X}, {U1, U2}, {Y});
  const double y_given_x = MutualInformation(j, {Y}, {U1, U2}, {X});
  ReducedPoint out;
  out.rc = internal::ClampRate(std::max(x_given_y, y_given_x));
  out.rk = internal::ClampRate(MutualInformation(j, {X}, {U1, U2}) - x_given_y);
  out.rk_alternate = MutualInformation(j, {Y}, {U1, U2}) - y_given_x;
  return out;
}

// Time sharing: lambda * a + (1 - lambda) * b, componentwise.
inline RatePoint TimeShare(const RatePoint& a, const RatePoint& b, double lambda) {
  auto mix = [lambda](double u, double v) { return lambda * u + (1.0 - lambda) * v; };
  RatePoint p;
  p.r1 = mix(a.r1, b.r1);
  p.r2 = mix(a.r2, b.r2);
  p.rc = mix(a.rc, b.rc);
  p.rk = mix(a.rk, b.rk);
  p.rk_unclamped = mix(a.rk_unclamped, b.rk_unclamped);
  return p;
}

}  // namespace relaykey

#endif  // RELAYKEY_RATE_REGIONS_HPP_
