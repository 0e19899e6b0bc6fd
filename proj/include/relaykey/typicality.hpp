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

// Robust joint typicality: a tuple of length-n sequences is typical for P when
// every symbol tuple a has empirical frequency within eps * P(a) of P(a). In
// particular zero-probability tuples never occur in a typical tuple.

#ifndef RELAYKEY_TYPICALITY_HPP_
#define RELAYKEY_TYPICALITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "relaykey/error.hpp"
#include "relaykey/prob.hpp"

namespace relaykey {

using Symbol = std::uint16_t;

// Precomputed allowed count range per symbol tuple for a fixed (P, eps, n).
// Holds scratch space: one instance per thread.
class TypicalityTest {
 public:
  TypicalityTest() = default;

  TypicalityTest(const FiniteJoint& joint, double eps, int n)
      : sizes_(joint.sizes()), n_(n) {
    if (!(eps > 0.0)) throw Error(ErrorCode::kConfigInvalid, "eps must be > 0");
    if (n < 1) throw Error(ErrorCode::kConfigInvalid, "n must be >= 1");
    constexpr double kTol = 1e-12;
    const double dn = static_cast<double>(n);
    lo_.resize(joint.size());
    hi_.resize(joint.size());
    for (std::size_t a = 0; a < joint.size(); ++a) {
      const double p = joint[a];
      if (p <= 0.0) {
        lo_[a] = hi_[a] = 0;
        continue;
      }
      lo_[a] = static_cast<int>(std::max(0.0, std::ceil(dn * (p - eps * p - kTol))));
      hi_[a] = static_cast<int>(std::min(dn, std::floor(dn * (p + eps * p + kTol))));
    }
    counts_.assign(joint.size(), 0);
  }

  int n() const { return n_; }
  std::size_t arity() const { return sizes_.size(); }

  // seqs[v][i] is symbol i of variable v.
  bool operator()(std::span<const std::span<const Symbol>> seqs) const {
    if (seqs.size() != sizes_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "tuple arity does not match the joint");
    }
    for (const auto& s : seqs) {
      if (s.size() != static_cast<std::size_t>(n_)) {
        throw Error(ErrorCode::kLengthMismatch, "sequence length != n");
      }
    }
    std::fill(counts_.begin(), counts_.end(), 0);
    for (int i = 0; i < n_; ++i) {
      std::size_t cell = 0;
      for (std::size_t v = 0; v < seqs.size(); ++v) {
        const Symbol s = seqs[v][static_cast<std::size_t>(i)];
        if (s >= sizes_[v]) throw Error(ErrorCode::kBadIndex, "symbol out of range");
        cell = cell * sizes_[v] + s;
      }
      if (++counts_[cell] > hi_[cell]) return false;
    }
    for (std::size_t a = 0; a < counts_.size(); ++a) {
      if (counts_[a] < lo_[a]) return false;
    }
    return true;
  }

  bool operator()(std::initializer_list<std::span<const Symbol>> seqs) const {
    return (*this)(std::span<const std::span<const Symbol>>(seqs.begin(), seqs.size()));
  }

 private:
  std::vector<std::size_t> sizes_;
  int n_ = 0;
  std::vector<int> lo_;
  std::vector<int> hi_;
  mutable std::vector<int> counts_;
};

inline bool IsTypical(std::span<const std::vector<Symbol>> seqs, const FiniteJoint& joint,
                      double eps) {
  if (seqs.empty()) throw Error(ErrorCode::kLengthMismatch, "no sequences");
  const std::size_t n = seqs.front().size();
  for (const auto& s : seqs) {
    if (s.size() != n) throw Error(ErrorCode::kLengthMismatch, "sequence lengths differ");
  }
  if (n == 0) throw Error(ErrorCode::kLengthMismatch, "empty sequences");
  TypicalityTest test(joint, eps, static_cast<int>(n));
  std::vector<std::span<const Symbol>> views(seqs.begin(), seqs.end());
  return test(views);
}

}  // namespace relaykey

#endif  // RELAYKEY_TYPICALITY_HPP_
