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

// Seeded invariant battery shared by the `selftest` subcommand.

#ifndef RELAYKEY_SELFTEST_HPP_
#define RELAYKEY_SELFTEST_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "relaykey/format.hpp"
#include "relaykey/gaussian.hpp"
#include "relaykey/prob.hpp"
#include "relaykey/protocol.hpp"
#include "relaykey/random.hpp"
#include "relaykey/rate_regions.hpp"

namespace relaykey {

// Random instances: Dirichlet(1) tables, optionally sparsified.

inline std::vector<double> RandomSimplexPoint(std::size_t k, Rng& rng,
                                              double zero_prob = 0.0) {
  std::vector<double> v(k);
  double sum = 0.0;
  for (auto& x : v) {
    x = UniformUnit(rng) < zero_prob ? 0.0 : -std::log(1.0 - UniformUnit(rng));
    sum += x;
  }
  if (sum <= 0.0) {
    v.assign(k, 0.0);
    v[UniformBelow(rng, k)] = 1.0;
    return v;
  }
  for (auto& x : v) x /= sum;
  return v;
}

inline FiniteJoint RandomJoint(std::vector<std::size_t> sizes, Rng& rng,
                               double zero_prob = 0.0) {
  std::size_t total = 1;
  for (auto s : sizes) total *= s;
  return FiniteJoint::Unchecked(std::move(sizes), RandomSimplexPoint(total, rng, zero_prob));
}

inline CondChannel RandomChannel(std::vector<std::size_t> inputs, std::size_t outputs,
                                 Rng& rng, double zero_prob = 0.0) {
  std::size_t rows = 1;
  for (auto s : inputs) rows *= s;
  std::vector<double> t;
  t.reserve(rows * outputs);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = RandomSimplexPoint(outputs, rng, zero_prob);
    t.insert(t.end(), row.begin(), row.end());
  }
  return CondChannel(std::move(inputs), {outputs}, std::move(t));
}

inline std::size_t RandomSize(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(UniformBelow(rng, hi - lo + 1));
}

struct SelfTestResult {
  std::string check;
  std::int64_t instances = 0;
  double max_violation = 0.0;
  bool passed = true;
};

inline constexpr std::string_view kSelfTestHeader = "check,instances,max_violation,passed";

namespace internal {

class CheckAccumulator {
 public:
  CheckAccumulator(std::string name, double tolerance)
      : result_{std::move(name), 0, 0.0, true}, tolerance_(tolerance) {}

  // `violation` is how far the instance is from satisfying the check; values
  // <= 0 mean satisfied.
  void Add(double violation) {
    ++result_.instances;
    const double v = std::isnan(violation) ? INFINITY : std::max(0.0, violation);
    result_.max_violation = std::max(result_.max_violation, v);
    if (v > tolerance_) result_.passed = false;
  }

  SelfTestResult Finish() const { return result_; }

 private:
  SelfTestResult result_;
  double tolerance_;
};

}  // namespace internal

inline std::vector<SelfTestResult> RunSelfTest(std::uint64_t seed, int instances) {
  std::vector<SelfTestResult> out;
  Rng rng(DeriveSeed(seed, Stream::kSelftest));

  {
    internal::CheckAccumulator nonneg("mutual_information_nonnegative", 1e-12);
    internal::CheckAccumulator chain("entropy_chain_rule", 1e-10);
    internal::CheckAccumulator dpi("data_processing", 1e-10);
    for (int i = 0; i < instances; ++i) {
      const FiniteJoint j =
          RandomJoint({RandomSize(rng, 1, 4), RandomSize(rng, 1, 4), RandomSize(rng, 1, 3)},
                      rng, 0.2);
      nonneg.Add(-MutualInformation(j, {0}, {1}, {2}));
      nonneg.Add(-MutualInformation(j, {0, 2}, {1}));
      chain.Add(std::abs(Entropy(j, {0, 1, 2}) -
                         (Entropy(j, {0}) + ConditionalEntropy(j, {1, 2}, {0}))));
      // Z as a channel output of Y gives the chain X - Y - Z.
      const FiniteJoint xy = Marginal(j, {0, 1});
      const CondChannel w = RandomChannel({xy.sizes()[1]}, RandomSize(rng, 1, 4), rng);
      const FiniteJoint m = ExtendMarkov(xy, ConstantChannel({xy.sizes()[0]}), w);
      dpi.Add(MutualInformation(m, {0}, {3}) - MutualInformation(m, {0}, {1}));
    }
    out.push_back(nonneg.Finish());
    out.push_back(chain.Finish());
    out.push_back(dpi.Finish());
  }

  {
    internal::CheckAccumulator forms("inner_key_rate_forms_agree", 1e-10);
    internal::CheckAccumulator ceiling("inner_key_rate_below_mutual_information", 1e-10);
    internal::CheckAccumulator outer("outer_matches_inner_on_product_channels", 1e-12);
    for (int i = 0; i < instances; ++i) {
      const std::size_t nx = RandomSize(rng, 1, 4), ny = RandomSize(rng, 1, 4);
      const FiniteJoint src = RandomJoint({nx, ny}, rng, 0.2);
      const CondChannel c1 = RandomChannel({nx}, RandomSize(rng, 1, nx + 1), rng, 0.2);
      const CondChannel c2 = RandomChannel({ny}, RandomSize(rng, 1, ny + 1), rng, 0.2);
      const auto ev = InnerPoint(src, c1, c2);
      forms.Add(std::abs(ev.point.rk_unclamped - ev.rk_alternate));
      ceiling.Add(ev.point.rk - MutualInformation(src, {0}, {1}));
      const auto o = OuterPoint(src, ProductChannel(c1, c2));
      outer.Add(std::max({std::abs(o.r1 - ev.point.r1), std::abs(o.r2 - ev.point.r2),
                          std::abs(o.rk_unclamped - ev.rk_alternate)}));
    }
    out.push_back(forms.Finish());
    out.push_back(ceiling.Finish());
    out.push_back(outer.Finish());
  }

  {
    internal::CheckAccumulator dom("trusted_dominates_reduced_inner", 1e-10);
    for (int i = 0; i < instances; ++i) {
      const std::size_t nx = RandomSize(rng, 2, 3), ny = RandomSize(rng, 2, 3);
      const FiniteJoint src = RandomJoint({nx, ny}, rng);
      const CondChannel c1 = RandomChannel({nx}, nx + 1, rng);
      const CondChannel c2 = RandomChannel({ny}, ny + 1, rng);
      const auto reduced = TrustedReducedInnerPoint(src, c1, c2);
      const auto full = TrustedRegionPoint(src, ProductChannel(c1, c2), CardinalityCheck::kSkip);
      dom.Add(std::max(reduced.rk - full.rk, std::abs(full.rc - reduced.rc)));
    }
    out.push_back(dom.Finish());
  }

  {
    internal::CheckAccumulator relay("relay_recovery_identity", 0.0);
    for (std::uint64_t size : {1u, 2u, 3u, 8u, 31u, 64u}) {
      for (std::uint64_t b1 = 0; b1 < size; ++b1) {
        for (std::uint64_t b2 = 0; b2 < size; ++b2) {
          const auto m = RelayMap(0, b1, 0, b2, size);
          const bool ok = RecoverPartnerIndex(m.bsum, b1, size) == b2 &&
                          RecoverPartnerIndex(m.bsum, b2, size) == b1;
          relay.Add(ok ? 0.0 : 1.0);
        }
      }
    }
    out.push_back(relay.Finish());
  }

  {
    internal::CheckAccumulator sat("gaussian_key_rate_saturates", 1e-12);
    internal::CheckAccumulator mono("gaussian_key_rate_increasing", 0.0);
    const double base = MaxKeyRateGaussian(0.6, 1.0, 1.0, 1.0);
    for (double beta : {1.2, 1.5, 2.0}) {
      sat.Add(std::abs(MaxKeyRateGaussian(0.6, beta, beta, 1.0) - base));
    }
    double prev = -1.0;
    for (int i = 0; i < 100; ++i) {
      const double beta = i / 100.0;
      const double rk = MaxKeyRateGaussian(0.6, beta, beta, 1.0);
      mono.Add(rk > prev ? 0.0 : 1.0);
      prev = rk;
    }
    out.push_back(sat.Finish());
    out.push_back(mono.Finish());
  }

  {
    internal::CheckAccumulator agree("keys_agree_on_successful_trials", 0.0);
    internal::CheckAccumulator det("simulation_deterministic", 0.0);
    for (double p : {0.1, 0.2}) {
      for (int n : {4, 6}) {
        SimConfig cfg;
        cfg.source = Dsbs(p);
        cfg.ch1 = IdentityChannel(2);
        cfg.ch2 = IdentityChannel(2);
        cfg.n = n;
        cfg.eps = 1.0;
        cfg.trials = 200;
        cfg.master_seed = seed + static_cast<std::uint64_t>(n);
        const auto trials = RunTrials(cfg);
        for (const auto& t : trials) {
          if (t.encoded && t.decoded) agree.Add(t.k1 == t.k2 ? 0.0 : 1.0);
        }
        const auto trials2 = RunTrials(cfg);
        bool same = trials.size() == trials2.size();
        for (std::size_t i = 0; same && i < trials.size(); ++i) {
          same = trials[i].k1 == trials2[i].k1 && trials[i].k2 == trials2[i].k2 &&
                 trials[i].encoded == trials2[i].encoded &&
                 trials[i].decoded == trials2[i].decoded;
        }
        det.Add(same ? 0.0 : 1.0);
      }
    }
    out.push_back(agree.Finish());
    out.push_back(det.Finish());
  }
  return out;
}

inline void WriteSelfTest(std::ostream& out, const std::vector<SelfTestResult>& results) {
  out << kSelfTestHeader << '\n';
  for (const auto& r : results) {
    out << r.check << ',' << r.instances << ',' << FormatNumber(r.max_violation) << ','
        << (r.passed ? "true" : "false") << '\n';
  }
}

}  // namespace relaykey

#endif  // RELAYKEY_SELFTEST_HPP_
