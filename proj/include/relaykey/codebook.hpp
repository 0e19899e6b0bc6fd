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

// Random codebooks with multi-part index spaces. A codeword is addressed by
// an index tuple (for a user: w_a, w_b, w_k, w'); tuples are ordered
// lexicographically, which is also the order of the flat index.

#ifndef RELAYKEY_CODEBOOK_HPP_
#define RELAYKEY_CODEBOOK_HPP_

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "relaykey/error.hpp"
#include "relaykey/random.hpp"
#include "relaykey/typicality.hpp"

namespace relaykey {

inline constexpr std::size_t kDefaultCodebookCap = std::size_t{1} << 25;  // symbols

namespace internal {

// Snaps an exponent within 1e-9 of an integer onto it, so that rounding noise
// in mutual information values does not add a spurious index.
inline double SnapExponent(double e) {
  const double r = std::round(e);
  return std::abs(e - r) < 1e-9 ? r : e;
}

}  // namespace internal

// ceil(2^{n * rate}), floored at 1.
inline std::uint64_t IndexSpaceSize(int n, double rate) {
  const double e = internal::SnapExponent(static_cast<double>(n) * rate);
  if (e <= 0.0) return 1;
  if (e > 62.0) {
    throw Error(ErrorCode::kMemoryCapExceeded, "index space 2^" + std::to_string(e));
  }
  return static_cast<std::uint64_t>(std::ceil(std::exp2(e)));
}

// 2^{ceil(n * rate)}: the modulus of the relay's index addition.
inline std::uint64_t PowerOfTwoSpaceSize(int n, double rate) {
  const double e = std::ceil(internal::SnapExponent(static_cast<double>(n) * rate));
  if (e <= 0.0) return 1;
  if (e > 62.0) {
    throw Error(ErrorCode::kMemoryCapExceeded, "index space 2^" + std::to_string(e));
  }
  return std::uint64_t{1} << static_cast<int>(e);
}

// floor(2^{n * rate}), floored at 1.
inline std::uint64_t FloorSpaceSize(int n, double rate) {
  const double e = internal::SnapExponent(static_cast<double>(n) * rate);
  if (e <= 0.0) return 1;
  if (e > 62.0) {
    throw Error(ErrorCode::kMemoryCapExceeded, "index space 2^" + std::to_string(e));
  }
  return static_cast<std::uint64_t>(std::floor(std::exp2(e)));
}

class IndexedCodebook {
 public:
  IndexedCodebook() = default;

  IndexedCodebook(std::vector<std::uint64_t> dims, int n, std::vector<Symbol> symbols)
      : dims_(std::move(dims)), n_(n), symbols_(std::move(symbols)) {
    count_ = 1;
    for (auto d : dims_) {
      if (d == 0) throw Error(ErrorCode::kConfigInvalid, "empty index space");
      count_ *= d;
    }
    if (symbols_.size() != count_ * static_cast<std::uint64_t>(n_)) {
      throw Error(ErrorCode::kShapeMismatch, "codebook symbol count mismatch");
    }
  }

  // Draws every symbol of every codeword i.i.d. from `marginal`.
  static IndexedCodebook Sample(std::vector<std::uint64_t> dims, int n,
                                std::span<const double> marginal, Rng& rng,
                                std::size_t cap = kDefaultCodebookCap) {
    std::uint64_t count = 1;
    for (auto d : dims) {
      if (d == 0 || count > cap / d) {
        throw Error(ErrorCode::kMemoryCapExceeded,
                    "codebook exceeds cap of " + std::to_string(cap) + " symbols");
      }
      count *= d;
    }
    if (count > cap / static_cast<std::uint64_t>(n)) {
      throw Error(ErrorCode::kMemoryCapExceeded,
                  "codebook exceeds cap of " + std::to_string(cap) + " symbols");
    }
    std::vector<Symbol> symbols(count * static_cast<std::uint64_t>(n));
    for (auto& s : symbols) s = static_cast<Symbol>(SampleIndex(rng, marginal));
    return IndexedCodebook(std::move(dims), n, std::move(symbols));
  }

  const std::vector<std::uint64_t>& dims() const { return dims_; }
  std::uint64_t count() const { return count_; }
  int n() const { return n_; }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  std::span<const Symbol> Codeword(std::uint64_t flat) const {
    return std::span<const Symbol>(symbols_).subspan(flat * static_cast<std::uint64_t>(n_),
                                                     static_cast<std::size_t>(n_));
  }

  std::uint64_t Flat(std::span<const std::uint64_t> idx) const {
    if (idx.size() != dims_.size()) throw Error(ErrorCode::kBadIndex, "index arity");
    std::uint64_t f = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= dims_[i]) throw Error(ErrorCode::kIndexOutOfRange, "codebook index");
      f = f * dims_[i] + idx[i];
    }
    return f;
  }

  std::vector<std::uint64_t> Unflat(std::uint64_t flat) const {
    std::vector<std::uint64_t> idx(dims_.size());
    for (std::size_t i = dims_.size(); i-- > 0;) {
      idx[i] = flat % dims_[i];
      flat /= dims_[i];
    }
    return idx;
  }

  friend bool operator==(const IndexedCodebook&, const IndexedCodebook&) = default;

 private:
  std::vector<std::uint64_t> dims_;
  int n_ = 0;
  std::uint64_t count_ = 0;
  std::vector<Symbol> symbols_;
};

// Dump format, one codeword per line:
//
//   # dims <book> <d0> <d1> ...
//   <book> <i0>,<i1>,... <s0> <s1> ... <s_{n-1}>
//
// where <book> is 1, 2 (users) or v (trusted relay).
inline void WriteCodebookDump(std::ostream& out, const std::string& name,
                              const IndexedCodebook& book) {
  out << "# dims " << name;
  for (auto d : book.dims()) out << ' ' << d;
  out << '\n';
  for (std::uint64_t f = 0; f < book.count(); ++f) {
    out << name << ' ';
    const auto idx = book.Unflat(f);
    for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? "," : "") << idx[i];
    for (Symbol s : book.Codeword(f)) out << ' ' << s;
    out << '\n';
  }
}

// Reads every book in a dump, keyed by name.
inline std::map<std::string, IndexedCodebook> ReadCodebookDump(std::istream& in) {
  std::map<std::string, std::vector<std::uint64_t>> dims;
  std::map<std::string, std::vector<Symbol>> symbols;
  std::map<std::string, int> lengths;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, kw, name;
      ls >> hash >> kw >> name;
      if (kw != "dims") continue;
      std::uint64_t d;
      while (ls >> d) dims[name].push_back(d);
      continue;
    }
    std::string name, tuple;
    ls >> name >> tuple;
    int len = 0;
    unsigned s;
    while (ls >> s) {
      symbols[name].push_back(static_cast<Symbol>(s));
      ++len;
    }
    lengths[name] = len;
  }
  std::map<std::string, IndexedCodebook> out;
  for (auto& [name, d] : dims) {
    out.emplace(name, IndexedCodebook(d, lengths[name], std::move(symbols[name])));
  }
  return out;
}

}  // namespace relaykey

#endif  // RELAYKEY_CODEBOOK_HPP_
