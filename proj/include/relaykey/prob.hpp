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

// Exact probability tables over finite alphabets and the entropy /
// mutual-information functionals used by every rate expression. All
// logarithms are base 2.

#ifndef RELAYKEY_PROB_HPP_
#define RELAYKEY_PROB_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relaykey/error.hpp"

namespace relaykey {

inline constexpr double kNormTolerance = 1e-12;
inline constexpr std::size_t kDefaultTableCap = 10'000'000;

namespace internal {

inline std::size_t CheckedProduct(std::span<const std::size_t> sizes,
                                  std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t s : sizes) {
    if (s == 0) throw Error(ErrorCode::kShapeMismatch, "alphabet size 0");
    if (total > cap / s) {
      throw Error(ErrorCode::kMemoryCapExceeded,
                  "table size exceeds cap of " + std::to_string(cap));
    }
    total *= s;
  }
  return total;
}

// Mass check shared by joints and channel rows. Returns the first violation.
inline std::optional<Error> CheckMass(std::span<const double> p,
                                      const std::string& where) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
      return Error(ErrorCode::kNegativeMass,
                   where + " entry " + std::to_string(i) + " is " +
                       std::to_string(p[i]));
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    return Error(ErrorCode::kNotNormalized,
                 where + " sums to " + std::to_string(sum));
  }
  return std::nullopt;
}

}  // namespace internal

// Dense joint probability table. Index tuples are laid out row-major: the last
// variable varies fastest.
class FiniteJoint {
 public:
  FiniteJoint() = default;

  // Validating constructor; throws Error on any violated invariant.
  FiniteJoint(std::vector<std::size_t> sizes, std::vector<double> probs,
              std::vector<std::string> labels = {},
              std::size_t cap = kDefaultTableCap)
      : FiniteJoint(Unchecked(std::move(sizes), std::move(probs),
                              std::move(labels), cap)) {
    Check();
  }

  // Builds a table without checking mass; used to inspect malformed input.
  static FiniteJoint Unchecked(std::vector<std::size_t> sizes,
                               std::vector<double> probs,
                               std::vector<std::string> labels = {},
                               std::size_t cap = kDefaultTableCap) {
    FiniteJoint j;
    j.sizes_ = std::move(sizes);
    j.probs_ = std::move(probs);
    j.labels_ = std::move(labels);
    j.cap_ = cap;
    if (j.labels_.empty()) {
      for (std::size_t i = 0; i < j.sizes_.size(); ++i) {
        j.labels_.push_back("V" + std::to_string(i));
      }
    }
    return j;
  }

  std::size_t arity() const { return sizes_.size(); }
  std::size_t size() const { return probs_.size(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t cap() const { return cap_; }

  double operator[](std::size_t flat) const { return probs_[flat]; }

  std::size_t FlatIndex(std::span<const std::size_t> tuple) const {
    if (tuple.size() != sizes_.size()) {
      throw Error(ErrorCode::kBadIndex, "tuple arity mismatch");
    }
    std::size_t flat = 0;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (tuple[i] >= sizes_[i]) {
        throw Error(ErrorCode::kBadIndex, "symbol out of range");
      }
      flat = flat * sizes_[i] + tuple[i];
    }
    return flat;
  }

  std::vector<std::size_t> Tuple(std::size_t flat) const {
    std::vector<std::size_t> t(sizes_.size());
    for (std::size_t i = sizes_.size(); i-- > 0;) {
      t[i] = flat % sizes_[i];
      flat /= sizes_[i];
    }
    return t;
  }

  double at(std::span<const std::size_t> tuple) const {
    return probs_[FlatIndex(tuple)];
  }

 private:
  friend std::optional<Error> Validate(const FiniteJoint& joint);
  void Check() const;

  std::vector<std::size_t> sizes_;
  std::vector<double> probs_;
  std::vector<std::string> labels_;
  std::size_t cap_ = kDefaultTableCap;
};

// Returns the first violated invariant, or nullopt when the table is valid.
inline std::optional<Error> Validate(const FiniteJoint& joint) {
  if (joint.sizes_.empty()) {
    return Error(ErrorCode::kShapeMismatch, "joint has no variables");
  }
  if (joint.labels_.size() != joint.sizes_.size()) {
    return Error(ErrorCode::kShapeMismatch, "label count != variable count");
  }
  std::size_t expected = 0;
  try {
    expected = internal::CheckedProduct(joint.sizes_, joint.cap_);
  } catch (const Error& e) {
    return e;
  }
  if (expected != joint.probs_.size()) {
    return Error(ErrorCode::kShapeMismatch,
                 "table has " + std::to_string(joint.probs_.size()) +
                     " entries, shape implies " + std::to_string(expected));
  }
  return internal::CheckMass(joint.probs_, "joint");
}

inline void FiniteJoint::Check() const {
  if (auto err = Validate(*this)) throw *err;
}

// Explicit repair for tables that are nonnegative but not quite normalized.
inline FiniteJoint Renormalize(const FiniteJoint& joint) {
  std::vector<double> p = joint.probs();
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kNegativeMass, "cannot renormalize");
    sum += v;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::kNotNormalized, "zero total mass");
  for (double& v : p) v /= sum;
  return FiniteJoint(joint.sizes(), std::move(p), joint.labels(), joint.cap());
}

// Row-stochastic conditional table P(outputs | inputs). Input and output
// tuples are flattened row-major like FiniteJoint.
class CondChannel {
 public:
  CondChannel() = default;

  CondChannel(std::vector<std::size_t> input_sizes,
              std::vector<std::size_t> output_sizes, std::vector<double> table)
      : input_sizes_(std::move(input_sizes)),
        output_sizes_(std::move(output_sizes)),
        table_(std::move(table)) {
    if (input_sizes_.empty() || output_sizes_.empty()) {
      throw Error(ErrorCode::kShapeMismatch, "channel needs inputs and outputs");
    }
    rows_ = internal::CheckedProduct(input_sizes_, kDefaultTableCap);
    cols_ = internal::CheckedProduct(output_sizes_, kDefaultTableCap);
    if (table_.size() != rows_ * cols_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "channel table has " + std::to_string(table_.size()) +
                      " entries, expected " + std::to_string(rows_ * cols_));
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (auto err = internal::CheckMass(row(r), "row " + std::to_string(r))) {
        throw *err;
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<std::size_t>& input_sizes() const { return input_sizes_; }
  const std::vector<std::size_t>& output_sizes() const { return output_sizes_; }
  const std::vector<double>& table() const { return table_; }
  bool empty() const { return table_.empty(); }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(table_).subspan(r * cols_, cols_);
  }
  double operator()(std::size_t r, std::size_t c) const {
    return table_[r * cols_ + c];
  }

  // Same table seen with a single flattened input (and output) variable.
  CondChannel Flattened() const {
    return CondChannel({rows_}, {cols_}, table_);
  }

  friend bool operator==(const CondChannel&, const CondChannel&) = default;

 private:
  std::vector<std::size_t> input_sizes_;
  std::vector<std::size_t> output_sizes_;
  std::vector<double> table_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

// ---------------------------------------------------------------------------
// Standard sources and channels.

inline FiniteJoint Bernoulli(double p) {
  return FiniteJoint({2}, {1.0 - p, p}, {"X"});
}

inline FiniteJoint UniformJoint(std::vector<std::size_t> sizes) {
  const std::size_t total = internal::CheckedProduct(sizes, kDefaultTableCap);
  return FiniteJoint(std::move(sizes),
                     std::vector<double>(total, 1.0 / static_cast<double>(total)));
}

// Doubly symmetric binary source: X ~ Bern(1/2), Y = X xor Bern(p).
inline FiniteJoint Dsbs(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "crossover must lie in [0,1]");
  }
  return FiniteJoint({2, 2},
                     {(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0},
                     {"X", "Y"});
}

// Z ~ Bern(1/2), X = Z xor Bern(a), Y = Z xor Bern(b); X - Z - Y is Markov.
// Variable order (X, Y, Z).
inline FiniteJoint CommonMarkovSource(double a, double b) {
  std::vector<double> p(8);
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int z = 0; z < 2; ++z) {
        const double px = (x == z) ? 1.0 - a : a;
        const double py = (y == z) ? 1.0 - b : b;
        p[(x * 2 + y) * 2 + z] = 0.5 * px * py;
      }
    }
  }
  return FiniteJoint({2, 2, 2}, std::move(p), {"X", "Y", "Z"});
}

inline CondChannel IdentityChannel(std::size_t n) {
  std::vector<double> t(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) t[i * n + i] = 1.0;
  return CondChannel({n}, {n}, std::move(t));
}

// Every input mapped to output symbol 0 of an alphabet of `outputs` symbols.
inline CondChannel ConstantChannel(std::vector<std::size_t> input_sizes,
                                   std::size_t outputs = 1) {
  const std::size_t rows = internal::CheckedProduct(input_sizes, kDefaultTableCap);
  std::vector<double> t(rows * outputs, 0.0);
  for (std::size_t r = 0; r < rows; ++r) t[r * outputs] = 1.0;
  return CondChannel(std::move(input_sizes), {outputs}, std::move(t));
}

// m-ary symmetric channel from `inputs` symbols into `outputs >= inputs`
// symbols: the input is kept with probability 1 - t and otherwise replaced
// uniformly by one of the other input symbols. Extra outputs are unused.
inline CondChannel SymmetricNoiseChannel(std::size_t inputs, std::size_t outputs,
                                         double t) {
  if (outputs < inputs) {
    throw Error(ErrorCode::kShapeMismatch, "symmetric channel needs outputs >= inputs");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "noise level must lie in [0,1]");
  }
  std::vector<double> table(inputs * outputs, 0.0);
  for (std::size_t x = 0; x < inputs; ++x) {
    if (inputs == 1) {
      table[0] = 1.0;
      break;
    }
    for (std::size_t u = 0; u < inputs; ++u) {
      table[x * outputs + u] =
          (u == x) ? 1.0 - t : t / static_cast<double>(inputs - 1);
    }
  }
  return CondChannel({inputs}, {outputs}, std::move(table));
}

inline CondChannel BinarySymmetricChannel(double p) {
  return SymmetricNoiseChannel(2, 2, p);
}

// Channel that sees a tuple input but only passes (a noisy copy of) one of its
// coordinates. Useful for V = X or V = Y seeds.
inline CondChannel ProjectionChannel(std::vector<std::size_t> input_sizes,
                                     std::size_t keep, std::size_t outputs) {
  if (keep >= input_sizes.size() || outputs < input_sizes[keep]) {
    throw Error(ErrorCode::kShapeMismatch, "bad projection");
  }
  const std::size_t rows = internal::CheckedProduct(input_sizes, kDefaultTableCap);
  std::vector<double> t(rows * outputs, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t rem = r;
    std::size_t sym = 0;
    for (std::size_t i = input_sizes.size(); i-- > 0;) {
      if (i == keep) sym = rem % input_sizes[i];
      rem /= input_sizes[i];
    }
    t[r * outputs + sym] = 1.0;
  }
  return CondChannel(std::move(input_sizes), {outputs}, std::move(t));
}

// P(u1,u2 | x,y) = P(u1|x) P(u2|y), inputs (X,Y), outputs (U1,U2).
inline CondChannel ProductChannel(const CondChannel& ch1, const CondChannel& ch2) {
  const std::size_t nx = ch1.rows(), ny = ch2.rows();
  const std::size_t n1 = ch1.cols(), n2 = ch2.cols();
  std::vector<double> t(nx * ny * n1 * n2);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      for (std::size_t u1 = 0; u1 < n1; ++u1) {
        for (std::size_t u2 = 0; u2 < n2; ++u2) {
          t[((x * ny + y) * n1 + u1) * n2 + u2] = ch1(x, u1) * ch2(y, u2);
        }
      }
    }
  }
  return CondChannel({nx, ny}, {n1, n2}, std::move(t));
}

// ---------------------------------------------------------------------------
// Marginals and information functionals.

namespace internal {

inline void CheckIndices(const FiniteJoint& joint,
                         std::span<const std::size_t> subset) {
  std::vector<bool> seen(joint.arity(), false);
  for (std::size_t v : subset) {
    if (v >= joint.arity()) {
      throw Error(ErrorCode::kBadIndex,
                  "variable index " + std::to_string(v) + " out of range");
    }
    if (seen[v]) throw Error(ErrorCode::kBadIndex, "repeated variable index");
    seen[v] = true;
  }
}

// Marginal masses over `subset` (in subset order), without building labels.
inline std::vector<double> MarginalMasses(const FiniteJoint& joint,
                                          std::span<const std::size_t> subset) {
  const auto& sizes = joint.sizes();
  const std::size_t arity = sizes.size();
  std::vector<std::size_t> stride(arity, 1);
  for (std::size_t i = arity - 1; i-- > 0;) stride[i] = stride[i + 1] * sizes[i + 1];
  std::size_t out_size = 1;
  std::vector<std::size_t> out_stride(subset.size(), 1);
  for (std::size_t i = subset.size(); i-- > 0;) {
    out_stride[i] = out_size;
    out_size *= sizes[subset[i]];
  }
  std::vector<double> out(out_size, 0.0);
  const auto& p = joint.probs();
  for (std::size_t flat = 0; flat < p.size(); ++flat) {
    if (p[flat] == 0.0) continue;
    std::size_t o = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const std::size_t v = subset[i];
      o += ((flat / stride[v]) % sizes[v]) * out_stride[i];
    }
    out[o] += p[flat];
  }
  return out;
}

inline double EntropyOfMasses(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

inline double SubsetEntropy(const FiniteJoint& joint,
                            std::span<const std::size_t> subset) {
  if (subset.empty()) return 0.0;
  return EntropyOfMasses(MarginalMasses(joint, subset));
}

}  // namespace internal

inline FiniteJoint Marginal(const FiniteJoint& joint,
                            std::span<const std::size_t> subset) {
  if (subset.empty()) throw Error(ErrorCode::kBadIndex, "empty subset");
  internal::CheckIndices(joint, subset);
  std::vector<std::size_t> sizes;
  std::vector<std::string> labels;
  for (std::size_t v : subset) {
    sizes.push_back(joint.sizes()[v]);
    labels.push_back(joint.labels()[v]);
  }
  return FiniteJoint::Unchecked(std::move(sizes),
                                internal::MarginalMasses(joint, subset),
                                std::move(labels), joint.cap());
}

inline FiniteJoint Marginal(const FiniteJoint& joint,
                            std::initializer_list<std::size_t> subset) {
  return Marginal(joint, std::span<const std::size_t>(subset.begin(), subset.size()));
}

// Shannon entropy in bits of the marginal on `subset`.
inline double Entropy(const FiniteJoint& joint,
                      std::span<const std::size_t> subset) {
  if (subset.empty()) throw Error(ErrorCode::kBadIndex, "empty subset");
  internal::CheckIndices(joint, subset);
  return internal::SubsetEntropy(joint, subset);
}

inline double Entropy(const FiniteJoint& joint,
                      std::initializer_list<std::size_t> subset) {
  return Entropy(joint, std::span<const std::size_t>(subset.begin(), subset.size()));
}

// H(target | given).
inline double ConditionalEntropy(const FiniteJoint& joint,
                                 std::span<const std::size_t> target,
                                 std::span<const std::size_t> given) {
  std::vector<std::size_t> all(target.begin(), target.end());
  all.insert(all.end(), given.begin(), given.end());
  internal::CheckIndices(joint, all);
  if (target.empty()) throw Error(ErrorCode::kBadIndex, "empty target");
  return internal::SubsetEntropy(joint, all) - internal::SubsetEntropy(joint, given);
}

inline double ConditionalEntropy(const FiniteJoint& joint,
                                 std::initializer_list<std::size_t> target,
                                 std::initializer_list<std::size_t> given) {
  return ConditionalEntropy(
      joint, std::span<const std::size_t>(target.begin(), target.size()),
      std::span<const std::size_t>(given.begin(), given.size()));
}

// I(A; B | C) in bits, evaluated as H(AC) + H(BC) - H(ABC) - H(C).
inline double MutualInformation(const FiniteJoint& joint,
                                std::span<const std::size_t> group_a,
                                std::span<const std::size_t> group_b,
                                std::span<const std::size_t> given = {}) {
  if (group_a.empty() || group_b.empty()) {
    throw Error(ErrorCode::kBadIndex, "mutual information needs two non-empty groups");
  }
  std::vector<std::size_t> all(group_a.begin(), group_a.end());
  all.insert(all.end(), group_b.begin(), group_b.end());
  all.insert(all.end(), given.begin(), given.end());
  for (std::size_t v : all) {
    if (v >= joint.arity()) {
      throw Error(ErrorCode::kBadIndex,
                  "variable index " + std::to_string(v) + " out of range");
    }
  }
  std::vector<std::size_t> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kOverlappingGroups, "groups must be disjoint");
  }
  std::vector<std::size_t> ac(group_a.begin(), group_a.end());
  ac.insert(ac.end(), given.begin(), given.end());
  std::vector<std::size_t> bc(group_b.begin(), group_b.end());
  bc.insert(bc.end(), given.begin(), given.end());
  return internal::SubsetEntropy(joint, ac) + internal::SubsetEntropy(joint, bc) -
         internal::SubsetEntropy(joint, all) - internal::SubsetEntropy(joint, given);
}

inline double MutualInformation(const FiniteJoint& joint,
                                std::initializer_list<std::size_t> group_a,
                                std::initializer_list<std::size_t> group_b,
                                std::initializer_list<std::size_t> given = {}) {
  return MutualInformation(
      joint, std::span<const std::size_t>(group_a.begin(), group_a.size()),
      std::span<const std::size_t>(group_b.begin(), group_b.size()),
      std::span<const std::size_t>(given.begin(), given.size()));
}

// ---------------------------------------------------------------------------
// Joint construction from a source and test channels.

namespace internal {

inline void RequireRows(const CondChannel& ch, std::size_t rows,
                        const char* what) {
  if (ch.empty() || ch.rows() != rows) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + " input size does not match the source");
  }
}

}  // namespace internal

// p(x,y,u1,u2) = p(x,y) p(u1|x) p(u2|y): the long Markov chain U1-X-Y-U2.
inline FiniteJoint ExtendMarkov(const FiniteJoint& source, const CondChannel& ch1,
                                const CondChannel& ch2) {
  if (source.arity() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y)");
  }
  const std::size_t nx = source.sizes()[0], ny = source.sizes()[1];
  internal::RequireRows(ch1, nx, "P(U1|X)");
  internal::RequireRows(ch2, ny, "P(U2|Y)");
  const std::size_t n1 = ch1.cols(), n2 = ch2.cols();
  std::vector<std::size_t> sizes{nx, ny, n1, n2};
  const std::size_t total = internal::CheckedProduct(sizes, source.cap());
  std::vector<double> p(total, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double pxy = source[x * ny + y];
      if (pxy == 0.0) continue;
      for (std::size_t u1 = 0; u1 < n1; ++u1) {
        for (std::size_t u2 = 0; u2 < n2; ++u2) {
          p[((x * ny + y) * n1 + u1) * n2 + u2] = pxy * (ch1(x, u1) * ch2(y, u2));
        }
      }
    }
  }
  return FiniteJoint::Unchecked(std::move(sizes), std::move(p),
                                {source.labels()[0], source.labels()[1], "U1", "U2"},
                                source.cap());
}

// p(x,y,z,u1,u2) = p(x,y,z) p(u1|x,z) p(u2|y,z). Channel rows are indexed by
// the flattened pairs (x,z) and (y,z).
inline FiniteJoint ExtendMarkovCommon(const FiniteJoint& source,
                                      const CondChannel& ch1,
                                      const CondChannel& ch2) {
  if (source.arity() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y, Z)");
  }
  const std::size_t nx = source.sizes()[0], ny = source.sizes()[1],
                    nz = source.sizes()[2];
  internal::RequireRows(ch1, nx * nz, "P(U1|X,Z)");
  internal::RequireRows(ch2, ny * nz, "P(U2|Y,Z)");
  const std::size_t n1 = ch1.cols(), n2 = ch2.cols();
  std::vector<std::size_t> sizes{nx, ny, nz, n1, n2};
  const std::size_t total = internal::CheckedProduct(sizes, source.cap());
  std::vector<double> p(total, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      for (std::size_t z = 0; z < nz; ++z) {
        const double pxyz = source[(x * ny + y) * nz + z];
        if (pxyz == 0.0) continue;
        for (std::size_t u1 = 0; u1 < n1; ++u1) {
          for (std::size_t u2 = 0; u2 < n2; ++u2) {
            p[(((x * ny + y) * nz + z) * n1 + u1) * n2 + u2] =
                pxyz * (ch1(x * nz + z, u1) * ch2(y * nz + z, u2));
          }
        }
      }
    }
  }
  return FiniteJoint::Unchecked(
      std::move(sizes), std::move(p),
      {source.labels()[0], source.labels()[1], source.labels()[2], "U1", "U2"},
      source.cap());
}

// p(x,y,outputs...) = p(x,y) p(outputs | x,y) with no structural constraint.
// The result has one variable per channel output.
inline FiniteJoint ExtendGeneral(const FiniteJoint& source, const CondChannel& ch) {
  if (source.arity() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y)");
  }
  internal::RequireRows(ch, source.size(), "P(.|X,Y)");
  std::vector<std::size_t> sizes = source.sizes();
  sizes.insert(sizes.end(), ch.output_sizes().begin(), ch.output_sizes().end());
  const std::size_t total = internal::CheckedProduct(sizes, source.cap());
  std::vector<double> p(total, 0.0);
  const std::size_t cols = ch.cols();
  for (std::size_t s = 0; s < source.size(); ++s) {
    const double ps = source[s];
    if (ps == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) p[s * cols + c] = ps * ch(s, c);
  }
  std::vector<std::string> labels = source.labels();
  if (ch.output_sizes().size() == 1) {
    labels.push_back("V");
  } else {
    for (std::size_t i = 0; i < ch.output_sizes().size(); ++i) {
      labels.push_back("U" + std::to_string(i + 1));
    }
  }
  return FiniteJoint::Unchecked(std::move(sizes), std::move(p), std::move(labels),
                                source.cap());
}

}  // namespace relaykey

#endif  // RELAYKEY_PROB_HPP_
