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

// Finite-blocklength simulation of the relay key-generation schemes.
//
// Untrusted relay: each user covers its source with a codeword
// u^n(w_a, w_b, w_k, w'), sends (w_a, w_b) to the relay, the relay broadcasts
// (w_1a, w_1b + w_2b mod |W_b|, w_2a), and each user removes its own w_b,
// then packing-decodes the other user's (w_k, w') among the codewords sharing
// the recovered (w_a, w_b). The key is (w_1k, w_2k).
//
// Common component: users observe (X, Z) and (Y, Z); the same scheme runs on
// these super-sources and the key gets the bin index of Z^n appended.
//
// Trusted relay: the relay observes (X^n, Y^n), covers them with v^n(w_c, w'),
// broadcasts w_c, and both users decode w', which is the key.
//
// Failures never abort a trial: an encoder without a typical codeword uses
// index 0, a decoder without a unique candidate outputs (0, 0). Both events
// are counted.

#ifndef RELAYKEY_PROTOCOL_HPP_
#define RELAYKEY_PROTOCOL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relaykey/codebook.hpp"
#include "relaykey/error.hpp"
#include "relaykey/format.hpp"
#include "relaykey/prob.hpp"
#include "relaykey/random.hpp"
#include "relaykey/typicality.hpp"

namespace relaykey {

enum class SimMode { kUntrusted, kTrusted, kCommon };

inline std::string_view SimModeName(SimMode m) {
  switch (m) {
    case SimMode::kUntrusted: return "untrusted";
    case SimMode::kTrusted: return "trusted";
    case SimMode::kCommon: return "common";
  }
  return "untrusted";
}

inline std::optional<SimMode> ParseSimMode(std::string_view s) {
  if (s == "untrusted") return SimMode::kUntrusted;
  if (s == "trusted") return SimMode::kTrusted;
  if (s == "common") return SimMode::kCommon;
  return std::nullopt;
}

inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;
inline constexpr std::size_t kDefaultLeakageSupportCap = 1'000'000;

struct SimConfig {
  SimMode mode = SimMode::kUntrusted;
  int n = 4;
  // Over (X, Y), or (X, Y, Z) in common mode.
  FiniteJoint source;
  // P(U1|X), P(U2|Y); in common mode P(U1|X,Z), P(U2|Y,Z).
  CondChannel ch1;
  CondChannel ch2;
  // Trusted mode only: P(V|X,Y).
  CondChannel relay_channel;
  double eps = 0.2;
  // Finite-n stand-in for the asymptotic slack delta_epsilon.
  double slack = 0.0;
  // Common-part rate; defaults to min{I(X;U1|Y), I(Y;U2|X)}.
  std::optional<double> rb;
  // (R_k1, R_k2); defaults to equal halves of the scheme's total key rate.
  std::optional<std::pair<double, double>> key_split;
  // Common mode: Z-bin key rate; defaults to H(Z|U1,U2) - 2 * slack.
  std::optional<double> rkz;
  std::int64_t trials = 1000;
  std::uint64_t master_seed = 1;
  std::size_t codebook_cap = kDefaultCodebookCap;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  std::size_t leakage_support_cap = kDefaultLeakageSupportCap;
};

inline void ValidateSimConfig(const SimConfig& cfg) {
  auto bad = [](const std::string& m) { return Error(ErrorCode::kConfigInvalid, m); };
  if (cfg.n < 1) throw bad("n must be >= 1");
  if (!(cfg.eps > 0.0)) throw bad("eps must be > 0");
  if (cfg.trials < 1) throw bad("trials must be >= 1");
  if (!std::isfinite(cfg.slack)) throw bad("slack must be finite");
  if (auto err = Validate(cfg.source)) throw bad(std::string("source: ") + err->what());
  const std::size_t want_arity = cfg.mode == SimMode::kCommon ? 3 : 2;
  if (cfg.source.arity() != want_arity) {
    throw bad(std::string(SimModeName(cfg.mode)) + " mode needs a source over " +
              (want_arity == 3 ? "(X, Y, Z)" : "(X, Y)"));
  }
  if (cfg.rb && !(*cfg.rb >= 0.0)) throw bad("rb must be >= 0");
  if (cfg.key_split && (!(cfg.key_split->first >= 0.0) || !(cfg.key_split->second >= 0.0))) {
    throw bad("key split rates must be >= 0");
  }
  if (cfg.rkz && !(*cfg.rkz >= 0.0)) throw bad("rkz must be >= 0");
  if (cfg.rkz && *cfg.rkz > 0.0 && cfg.mode != SimMode::kCommon) {
    throw bad("rkz applies to common mode only");
  }
  if (cfg.mode == SimMode::kTrusted) {
    if (cfg.relay_channel.empty() || cfg.relay_channel.rows() != cfg.source.size()) {
      throw Error(ErrorCode::kShapeMismatch, "relay channel must have |X||Y| rows");
    }
  } else {
    const std::size_t nz = cfg.mode == SimMode::kCommon ? cfg.source.sizes()[2] : 1;
    if (cfg.ch1.empty() || cfg.ch1.rows() != cfg.source.sizes()[0] * nz ||
        cfg.ch2.empty() || cfg.ch2.rows() != cfg.source.sizes()[1] * nz) {
      throw Error(ErrorCode::kShapeMismatch, "test channel inputs do not match the source");
    }
  }
}

// Information quantities of the configured test channels and the resulting
// scheme rates. A and B denote the users' observations: X and Y, or (X, Z)
// and (Y, Z) in common mode.
struct SchemeRates {
  double i1 = 0.0;      // I(A;U1|B)
  double i2 = 0.0;      // I(B;U2|A)
  double i_b_u1 = 0.0;  // I(B;U1)
  double i_a_u2 = 0.0;  // I(A;U2)
  double i_u1_u2 = 0.0;
  double rb = 0.0;
  double rk1 = 0.0;
  double rk2 = 0.0;
  double rkz = 0.0;
  // Trusted relay: max{I(X;V|Y), I(Y;V|X)} and min{I(X;V), I(Y;V)}.
  double ic = 0.0;
  double ik = 0.0;
};

// Two-user codebook. Both books have index dims {a, b, k, p}.
struct Codebook {
  int n = 0;
  FiniteJoint extended;  // (A, B, U1, U2)
  IndexedCodebook user1;
  IndexedCodebook user2;
  std::uint64_t rb_size = 1;
  SchemeRates rates;
  std::uint64_t seed = 0;

  const IndexedCodebook& book(int user) const { return user == 1 ? user1 : user2; }
};

// Trusted-relay codebook with index dims {w_c, w'}.
struct RelayCodebook {
  int n = 0;
  FiniteJoint extended;  // (X, Y, V)
  IndexedCodebook book;
  SchemeRates rates;
  std::uint64_t seed = 0;
};

namespace internal {

// Observation alphabet of each user and the mapping from source cells.
struct SuperSource {
  FiniteJoint ab;  // over (A, B)
  std::size_t nz = 1;
  // Per source cell: A symbol, B symbol, Z symbol.
  std::vector<std::array<Symbol, 3>> cell_symbols;
};

inline SuperSource MakeSuperSource(const SimConfig& cfg) {
  SuperSource s;
  const auto& src = cfg.source;
  if (cfg.mode != SimMode::kCommon) {
    s.ab = src;
    const std::size_t ny = src.sizes()[1];
    for (std::size_t c = 0; c < src.size(); ++c) {
      s.cell_symbols.push_back(
          {static_cast<Symbol>(c / ny), static_cast<Symbol>(c % ny), 0});
    }
    return s;
  }
  const std::size_t nx = src.sizes()[0], ny = src.sizes()[1], nz = src.sizes()[2];
  s.nz = nz;
  std::vector<double> p(nx * nz * ny * nz, 0.0);
  for (std::size_t c = 0; c < src.size(); ++c) {
    const std::size_t z = c % nz, y = (c / nz) % ny, x = c / (nz * ny);
    const std::size_t a = x * nz + z, b = y * nz + z;
    p[a * ny * nz + b] += src[c];
    s.cell_symbols.push_back(
        {static_cast<Symbol>(a), static_cast<Symbol>(b), static_cast<Symbol>(z)});
  }
  s.ab = FiniteJoint::Unchecked({nx * nz, ny * nz}, std::move(p), {"A", "B"});
  return s;
}

}  // namespace internal

inline SchemeRates ComputeSchemeRates(const SimConfig& cfg) {
  SchemeRates r;
  if (cfg.mode == SimMode::kTrusted) {
    const FiniteJoint j = ExtendGeneral(cfg.source, cfg.relay_channel.Flattened());
    r.ic = std::max(MutualInformation(j, {0}, {2}, {1}), MutualInformation(j, {1}, {2}, {0}));
    r.ik = std::min(MutualInformation(j, {0}, {2}), MutualInformation(j, {1}, {2}));
    return r;
  }
  const auto ss = internal::MakeSuperSource(cfg);
  const FiniteJoint j = ExtendMarkov(ss.ab, cfg.ch1.Flattened(), cfg.ch2.Flattened());
  constexpr std::size_t A = 0, B = 1, U1 = 2, U2 = 3;
  r.i1 = MutualInformation(j, {A}, {U1}, {B});
  r.i2 = MutualInformation(j, {B}, {U2}, {A});
  r.i_b_u1 = MutualInformation(j, {B}, {U1});
  r.i_a_u2 = MutualInformation(j, {A}, {U2});
  r.i_u1_u2 = MutualInformation(j, {U1}, {U2});
  r.rb = cfg.rb.value_or(std::max(0.0, std::min(r.i1, r.i2)));
  if (cfg.key_split) {
    r.rk1 = cfg.key_split->first;
    r.rk2 = cfg.key_split->second;
  } else {
    const double total = std::max(0.0, r.i_b_u1 + r.i_a_u2 - r.i_u1_u2 - cfg.slack);
    r.rk1 = r.rk2 = total / 2.0;
  }
  if (cfg.mode == SimMode::kCommon) {
    if (cfg.rkz) {
      r.rkz = *cfg.rkz;
    } else {
      const FiniteJoint jc = ExtendMarkovCommon(cfg.source, cfg.ch1, cfg.ch2);
      r.rkz = std::max(0.0, ConditionalEntropy(jc, {2}, {3, 4}) - 2.0 * cfg.slack);
    }
  }
  return r;
}

inline Codebook BuildCodebook(const SimConfig& cfg) {
  ValidateSimConfig(cfg);
  if (cfg.mode == SimMode::kTrusted) {
    throw Error(ErrorCode::kConfigInvalid, "trusted mode uses BuildRelayCodebook");
  }
  Codebook cb;
  cb.n = cfg.n;
  cb.seed = cfg.master_seed;
  cb.rates = ComputeSchemeRates(cfg);
  const auto ss = internal::MakeSuperSource(cfg);
  cb.extended = ExtendMarkov(ss.ab, cfg.ch1.Flattened(), cfg.ch2.Flattened());
  const auto& r = cb.rates;
  const double d = cfg.slack;
  const int n = cfg.n;
  cb.rb_size = PowerOfTwoSpaceSize(n, r.rb);
  const std::vector<std::uint64_t> dims1{IndexSpaceSize(n, r.i1 - r.rb + 2 * d), cb.rb_size,
                                         IndexSpaceSize(n, r.rk1),
                                         IndexSpaceSize(n, r.i_b_u1 - r.rk1 - d)};
  const std::vector<std::uint64_t> dims2{IndexSpaceSize(n, r.i2 - r.rb + 2 * d), cb.rb_size,
                                         IndexSpaceSize(n, r.rk2),
                                         IndexSpaceSize(n, r.i_a_u2 - r.rk2 - d)};
  const auto pu1 = internal::MarginalMasses(cb.extended, std::vector<std::size_t>{2});
  const auto pu2 = internal::MarginalMasses(cb.extended, std::vector<std::size_t>{3});
  Rng rng1(DeriveSeed(cfg.master_seed, Stream::kCodebookUser1));
  Rng rng2(DeriveSeed(cfg.master_seed, Stream::kCodebookUser2));
  cb.user1 = IndexedCodebook::Sample(dims1, n, pu1, rng1, cfg.codebook_cap);
  cb.user2 = IndexedCodebook::Sample(dims2, n, pu2, rng2, cfg.codebook_cap);
  return cb;
}

inline RelayCodebook BuildRelayCodebook(const SimConfig& cfg) {
  ValidateSimConfig(cfg);
  if (cfg.mode != SimMode::kTrusted) {
    throw Error(ErrorCode::kConfigInvalid, "relay codebook needs trusted mode");
  }
  RelayCodebook cb;
  cb.n = cfg.n;
  cb.seed = cfg.master_seed;
  cb.rates = ComputeSchemeRates(cfg);
  cb.extended = ExtendGeneral(cfg.source, cfg.relay_channel.Flattened());
  const std::vector<std::uint64_t> dims{
      IndexSpaceSize(cfg.n, cb.rates.ic + 2 * cfg.slack),
      IndexSpaceSize(cfg.n, cb.rates.ik - cfg.slack)};
  const auto pv = internal::MarginalMasses(cb.extended, std::vector<std::size_t>{2});
  Rng rng(DeriveSeed(cfg.master_seed, Stream::kCodebookRelay));
  cb.book = IndexedCodebook::Sample(dims, cfg.n, pv, rng, cfg.codebook_cap);
  return cb;
}

inline void WriteCodebookDump(std::ostream& out, const Codebook& cb) {
  out << "# relaykey codebook n=" << cb.n << " rb_size=" << cb.rb_size << '\n';
  WriteCodebookDump(out, "1", cb.user1);
  WriteCodebookDump(out, "2", cb.user2);
}

inline void WriteCodebookDump(std::ostream& out, const RelayCodebook& cb) {
  out << "# relaykey relay codebook n=" << cb.n << '\n';
  WriteCodebookDump(out, "v", cb.book);
}

// ---------------------------------------------------------------------------
// Relay network coding.

struct RelayMessage {
  std::uint64_t w1a = 0;
  std::uint64_t bsum = 0;
  std::uint64_t w2a = 0;
  friend bool operator==(const RelayMessage&, const RelayMessage&) = default;
};

inline RelayMessage RelayMap(std::uint64_t w1a, std::uint64_t w1b, std::uint64_t w2a,
                             std::uint64_t w2b, std::uint64_t rb_size) {
  if (rb_size == 0 || w1b >= rb_size || w2b >= rb_size) {
    throw Error(ErrorCode::kIndexOutOfRange, "w_b index outside [0, rb_size)");
  }
  return {w1a, (w1b + w2b) % rb_size, w2a};
}

// The partner's w_b given the broadcast sum and one's own w_b.
inline std::uint64_t RecoverPartnerIndex(std::uint64_t bsum, std::uint64_t own_b,
                                         std::uint64_t rb_size) {
  if (rb_size == 0 || bsum >= rb_size || own_b >= rb_size) {
    throw Error(ErrorCode::kIndexOutOfRange, "w_b index outside [0, rb_size)");
  }
  return (bsum + rb_size - own_b) % rb_size;
}

// ---------------------------------------------------------------------------
// Covering and packing steps.

using IndexTuple = std::array<std::uint64_t, 4>;  // (w_a, w_b, w_k, w')

namespace internal {

inline IndexTuple ToTuple(const IndexedCodebook& book, std::uint64_t flat) {
  const auto v = book.Unflat(flat);
  return {v[0], v[1], v[2], v[3]};
}

// Smallest flat index whose codeword is typical together with `obs`.
inline std::optional<std::uint64_t> FirstTypical(const IndexedCodebook& book,
                                                 std::span<const Symbol> obs,
                                                 const TypicalityTest& test) {
  for (std::uint64_t f = 0; f < book.count(); ++f) {
    if (test({obs, book.Codeword(f)})) return f;
  }
  return std::nullopt;
}

inline std::array<std::size_t, 3> DecoderVars(int user) {
  // (own observation, own codeword, partner codeword) in the extended joint.
  return user == 1 ? std::array<std::size_t, 3>{0, 2, 3}
                   : std::array<std::size_t, 3>{1, 3, 2};
}

inline void CheckUser(int user) {
  if (user != 1 && user != 2) throw Error(ErrorCode::kConfigInvalid, "user must be 1 or 2");
}

}  // namespace internal

// Covering step: the lexicographically smallest index tuple whose codeword is
// jointly typical with `seq`; nullopt is an encoding failure.
inline std::optional<IndexTuple> EncodeUser(std::span<const Symbol> seq, const Codebook& cb,
                                            int user, double eps) {
  internal::CheckUser(user);
  if (seq.size() != static_cast<std::size_t>(cb.n)) {
    throw Error(ErrorCode::kLengthMismatch, "sequence length != n");
  }
  const std::size_t obs = user == 1 ? 0 : 1, u = user == 1 ? 2 : 3;
  const TypicalityTest test(Marginal(cb.extended, {obs, u}), eps, cb.n);
  const auto& book = cb.book(user);
  if (auto f = internal::FirstTypical(book, seq, test)) return internal::ToTuple(book, *f);
  return std::nullopt;
}

enum class DecodeStatus { kUnique, kNone, kAmbiguous };

struct Decoding {
  DecodeStatus status = DecodeStatus::kNone;
  // Partner's (w_k, w'); (0, 0) unless status is kUnique.
  std::uint64_t wk = 0;
  std::uint64_t wp = 0;
};

namespace internal {

inline Decoding DecodeWith(const RelayMessage& wc, std::span<const Symbol> own_seq,
                           const IndexTuple& own, const Codebook& cb, int user,
                           const TypicalityTest& test) {
  const auto& own_book = cb.book(user);
  const auto& other = cb.book(user == 1 ? 2 : 1);
  const std::uint64_t other_a = user == 1 ? wc.w2a : wc.w1a;
  const std::uint64_t other_b = RecoverPartnerIndex(wc.bsum, own[1], cb.rb_size);
  const auto own_word = own_book.Codeword(own_book.Flat(own));
  const auto& d = other.dims();
  if (other_a >= d[0]) throw Error(ErrorCode::kIndexOutOfRange, "w_a outside codebook");
  Decoding out;
  int found = 0;
  const std::uint64_t base = (other_a * d[1] + other_b) * d[2] * d[3];
  for (std::uint64_t k = 0; k < d[2]; ++k) {
    for (std::uint64_t p = 0; p < d[3]; ++p) {
      if (!test({own_seq, own_word, other.Codeword(base + k * d[3] + p)})) continue;
      if (++found > 1) return {DecodeStatus::kAmbiguous, 0, 0};
      out.wk = k;
      out.wp = p;
    }
  }
  if (found == 0) return {DecodeStatus::kNone, 0, 0};
  out.status = DecodeStatus::kUnique;
  return out;
}

}  // namespace internal

// Packing step: recover the partner's w_b from the broadcast, then find the
// unique (w_k, w') whose codeword is typical with (own sequence, own codeword).
inline Decoding DecodeUser(const RelayMessage& wc, std::span<const Symbol> own_seq,
                           const IndexTuple& own_indices, const Codebook& cb, int user,
                           double eps) {
  internal::CheckUser(user);
  if (own_seq.size() != static_cast<std::size_t>(cb.n)) {
    throw Error(ErrorCode::kLengthMismatch, "sequence length != n");
  }
  const auto vars = internal::DecoderVars(user);
  const TypicalityTest test(Marginal(cb.extended, std::span<const std::size_t>(vars)), eps,
                            cb.n);
  return internal::DecodeWith(wc, own_seq, own_indices, cb, user, test);
}

// ---------------------------------------------------------------------------
// Reports.

struct SimReport {
  SimMode mode = SimMode::kUntrusted;
  int n = 0;
  double eps = 0.0;
  double slack = 0.0;
  std::optional<double> rb;
  double rk1 = 0.0;
  double rk2 = 0.0;
  double rkz = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  bool exact = false;

  // Pr(K1 = K2 | every encoder succeeded).
  double agreement_rate = 0.0;
  double encoding_failure_rate = 0.0;
  // Pr(encoders succeeded, and some decoder did not return the partner's true
  // indices). Includes mis-decodes.
  double decoding_failure_rate = 0.0;
  // Subset of decoding failures where a decoder returned a unique but wrong
  // candidate.
  double misdecode_rate = 0.0;
  // Pr(K1 != K2 or any failure).
  double total_error_rate = 0.0;
  // Mass (exact) or count (Monte Carlo) of trials where all encoders succeeded.
  double encoded_mass = 0.0;
  double empirical_key_entropy_rate = 0.0;
  // I(K1,K2;W1,W2)/n, or I(K1,K2;Wc)/n in trusted mode.
  std::optional<double> leakage_rate;
  std::optional<double> leakage_se;
  // I(K1,K2;Wc)/n of the untrusted pipeline.
  std::optional<double> leakage_wc_rate;
  // I(W1k;W2k)/n.
  std::optional<double> partial_key_mi;
};

inline constexpr std::string_view kSimReportHeader =
    "mode,n,eps,slack,rb,rk1,rk2,rkz,trials,seed,exact,agreement,enc_fail,dec_fail,misdecode,"
    "total_error,key_entropy_rate,leakage_rate,leakage_se,leakage_wc_rate,partial_key_mi";

inline void WriteSimReportRow(std::ostream& out, const SimReport& r) {
  out << SimModeName(r.mode) << ',' << r.n << ',' << FormatNumber(r.eps) << ','
      << FormatNumber(r.slack) << ',' << FormatNumber(r.rb) << ',' << FormatNumber(r.rk1)
      << ',' << FormatNumber(r.rk2) << ',' << FormatNumber(r.rkz) << ',' << r.trials << ','
      << r.seed << ',' << (r.exact ? "true" : "false") << ','
      << FormatNumber(r.agreement_rate) << ',' << FormatNumber(r.encoding_failure_rate) << ','
      << FormatNumber(r.decoding_failure_rate) << ',' << FormatNumber(r.misdecode_rate) << ','
      << FormatNumber(r.total_error_rate) << ',' << FormatNumber(r.empirical_key_entropy_rate)
      << ',' << FormatNumber(r.leakage_rate) << ',' << FormatNumber(r.leakage_se) << ','
      << FormatNumber(r.leakage_wc_rate) << ',' << FormatNumber(r.partial_key_mi) << '\n';
}

// ---------------------------------------------------------------------------
// Trial engines.

namespace internal {

// Everything one trial produces that the statistics need.
struct TrialOutcome {
  bool encoded = false;
  bool decoded = false;  // both decoders recovered the partner's true indices
  bool misdecoded = false;
  std::uint64_t k1 = 0, k2 = 0;
  std::uint64_t w1 = 0, w2 = 0, wc = 0;
  std::uint64_t w1k = 0, w2k = 0;
};

// Joint law over (K1, K2, W1, W2, Wc, W1k, W2k), by mass or by count.
using LawKey = std::array<std::uint64_t, 7>;
using Law = std::map<LawKey, double>;

inline LawKey KeyOf(const TrialOutcome& t) {
  return {t.k1, t.k2, t.w1, t.w2, t.wc, t.w1k, t.w2k};
}

template <std::size_t N>
using Projection = std::array<std::size_t, N>;

template <std::size_t N>
std::map<std::array<std::uint64_t, N>, double> Project(const Law& law,
                                                       const Projection<N>& fields) {
  std::map<std::array<std::uint64_t, N>, double> out;
  for (const auto& [k, m] : law) {
    std::array<std::uint64_t, N> sub;
    for (std::size_t i = 0; i < N; ++i) sub[i] = k[fields[i]];
    out[sub] += m;
  }
  return out;
}

template <typename Map>
double LawEntropy(const Map& m, double total) {
  if (m.size() <= 1) return 0.0;
  double h = 0.0;
  for (const auto& [k, v] : m) {
    if (v > 0.0) {
      const double p = v / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

template <std::size_t NA, std::size_t NB>
double LawMutualInformation(const Law& law, double total, const Projection<NA>& a,
                            const Projection<NB>& b) {
  Projection<NA + NB> ab;
  std::copy(a.begin(), a.end(), ab.begin());
  std::copy(b.begin(), b.end(), ab.begin() + NA);
  const double v = LawEntropy(Project(law, a), total) + LawEntropy(Project(law, b), total) -
                   LawEntropy(Project(law, ab), total);
  return std::max(0.0, v);
}

// Standard error of the plug-in mutual information estimate from `total`
// i.i.d. samples (delta method).
template <std::size_t NA, std::size_t NB>
double LawMutualInformationSe(const Law& law, double total, const Projection<NA>& a,
                              const Projection<NB>& b) {
  Projection<NA + NB> ab;
  std::copy(a.begin(), a.end(), ab.begin());
  std::copy(b.begin(), b.end(), ab.begin() + NA);
  const auto pa = Project(law, a);
  const auto pb = Project(law, b);
  const auto pab = Project(law, ab);
  double m1 = 0.0, m2 = 0.0;
  for (const auto& [k, v] : pab) {
    std::array<std::uint64_t, NA> ka;
    std::array<std::uint64_t, NB> kb;
    std::copy(k.begin(), k.begin() + NA, ka.begin());
    std::copy(k.begin() + NA, k.end(), kb.begin());
    const double p = v / total;
    const double l = std::log2(v * total / (pa.at(ka) * pb.at(kb)));
    m1 += p * l;
    m2 += p * l * l;
  }
  return std::sqrt(std::max(0.0, m2 - m1 * m1) / total);
}

// Caches encoder output per observation sequence.
class EncodeCache {
 public:
  EncodeCache(std::size_t alphabet, int n) : alphabet_(alphabet) {
    double cells = std::pow(static_cast<double>(alphabet), n);
    enabled_ = cells < 1e7;
  }

  template <typename Fn>
  std::optional<std::uint64_t> Get(std::span<const Symbol> seq, Fn&& compute) {
    if (!enabled_) return compute();
    std::uint64_t code = 0;
    for (Symbol s : seq) code = code * alphabet_ + s;
    auto it = cache_.find(code);
    if (it != cache_.end()) return it->second;
    auto v = compute();
    cache_.emplace(code, v);
    return v;
  }

 private:
  std::size_t alphabet_;
  bool enabled_ = false;
  std::unordered_map<std::uint64_t, std::optional<std::uint64_t>> cache_;
};

class TwoUserEngine {
 public:
  TwoUserEngine(const SimConfig& cfg, const Codebook& cb)
      : cfg_(cfg),
        cb_(cb),
        ss_(MakeSuperSource(cfg)),
        enc1_(Marginal(cb.extended, {0, 2}), cfg.eps, cfg.n),
        enc2_(Marginal(cb.extended, {1, 3}), cfg.eps, cfg.n),
        dec1_(Marginal(cb.extended, {0, 2, 3}), cfg.eps, cfg.n),
        dec2_(Marginal(cb.extended, {1, 3, 2}), cfg.eps, cfg.n),
        cache1_(cb.extended.sizes()[0], cfg.n),
        cache2_(cb.extended.sizes()[1], cfg.n) {
    if (cfg.mode == SimMode::kCommon) BuildZPartition();
  }

  const SuperSource& super_source() const { return ss_; }
  std::uint64_t z_bins() const { return z_bins_; }
  const std::vector<std::uint64_t>& z_bin_of() const { return z_bin_of_; }

  // `cells` holds one source-cell index per position.
  TrialOutcome Run(std::span<const std::size_t> cells) {
    const std::size_t n = cells.size();
    seq_a_.resize(n);
    seq_b_.resize(n);
    std::uint64_t zcode = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = ss_.cell_symbols[cells[i]];
      seq_a_[i] = s[0];
      seq_b_[i] = s[1];
      zcode = zcode * ss_.nz + s[2];
    }
    TrialOutcome t;
    const auto f1 = cache1_.Get(seq_a_, [&] { return FirstTypical(cb_.user1, seq_a_, enc1_); });
    const auto f2 = cache2_.Get(seq_b_, [&] { return FirstTypical(cb_.user2, seq_b_, enc2_); });
    t.encoded = f1.has_value() && f2.has_value();
    const IndexTuple i1 = ToTuple(cb_.user1, f1.value_or(0));
    const IndexTuple i2 = ToTuple(cb_.user2, f2.value_or(0));
    const RelayMessage wc = RelayMap(i1[0], i1[1], i2[0], i2[1], cb_.rb_size);
    const Decoding d1 = DecodeWith(wc, seq_a_, i1, cb_, 1, dec1_);
    const Decoding d2 = DecodeWith(wc, seq_b_, i2, cb_, 2, dec2_);
    const bool ok1 = d1.status == DecodeStatus::kUnique && d1.wk == i2[2] && d1.wp == i2[3];
    const bool ok2 = d2.status == DecodeStatus::kUnique && d2.wk == i1[2] && d2.wp == i1[3];
    t.decoded = ok1 && ok2;
    t.misdecoded = (d1.status == DecodeStatus::kUnique && !ok1) ||
                   (d2.status == DecodeStatus::kUnique && !ok2);

    const auto& d1dims = cb_.user1.dims();
    const auto& d2dims = cb_.user2.dims();
    const std::uint64_t kz = cfg_.mode == SimMode::kCommon ? z_bin_of_[zcode] : 0;
    auto key = [&](std::uint64_t w1k, std::uint64_t w2k) {
      return (w1k * d2dims[2] + w2k) * z_bins_ + kz;
    };
    t.k1 = key(i1[2], d1.wk);
    t.k2 = key(d2.wk, i2[2]);
    t.w1 = i1[0] * d1dims[1] + i1[1];
    t.w2 = i2[0] * d2dims[1] + i2[1];
    t.wc = (wc.w1a * cb_.rb_size + wc.bsum) * d2dims[0] + wc.w2a;
    t.w1k = i1[2];
    t.w2k = i2[2];
    return t;
  }

  // |K| * |W1| * |W2| for the plug-in leakage guard.
  double LeakageSupport() const {
    const auto& a = cb_.user1.dims();
    const auto& b = cb_.user2.dims();
    const double key = static_cast<double>(a[2]) * static_cast<double>(b[2]) *
                       static_cast<double>(z_bins_);
    return key * static_cast<double>(a[0] * a[1]) * static_cast<double>(b[0] * b[1]);
  }

 private:
  void BuildZPartition() {
    const double count = std::pow(static_cast<double>(ss_.nz), cfg_.n);
    if (count > static_cast<double>(cfg_.enumeration_cap)) {
      throw Error(ErrorCode::kEnumerationCapExceeded,
                  "Z-partition over " + FormatNumber(count) +
                      " sequences exceeds the enumeration cap of " +
                      std::to_string(cfg_.enumeration_cap));
    }
    const auto total = static_cast<std::uint64_t>(count);
    z_bins_ = FloorSpaceSize(cfg_.n, cb_.rates.rkz);
    std::vector<std::uint64_t> perm(total);
    for (std::uint64_t i = 0; i < total; ++i) perm[i] = i;
    Rng rng(DeriveSeed(cfg_.master_seed, Stream::kZPartition));
    for (std::uint64_t i = total; i > 1; --i) {
      std::swap(perm[i - 1], perm[UniformBelow(rng, i)]);
    }
    z_bin_of_.assign(total, 0);
    for (std::uint64_t pos = 0; pos < total; ++pos) z_bin_of_[perm[pos]] = pos % z_bins_;
  }

  const SimConfig& cfg_;
  const Codebook& cb_;
  SuperSource ss_;
  TypicalityTest enc1_, enc2_, dec1_, dec2_;
  EncodeCache cache1_, cache2_;
  std::uint64_t z_bins_ = 1;
  std::vector<std::uint64_t> z_bin_of_{0};
  std::vector<Symbol> seq_a_, seq_b_;
};

class TrustedEngine {
 public:
  TrustedEngine(const SimConfig& cfg, const RelayCodebook& cb)
      : cb_(cb),
        relay_(cb.extended, cfg.eps, cfg.n),
        user1_(Marginal(cb.extended, {0, 2}), cfg.eps, cfg.n),
        user2_(Marginal(cb.extended, {1, 2}), cfg.eps, cfg.n),
        ny_(cfg.source.sizes()[1]) {}

  TrialOutcome Run(std::span<const std::size_t> cells) {
    const std::size_t n = cells.size();
    x_.resize(n);
    y_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x_[i] = static_cast<Symbol>(cells[i] / ny_);
      y_[i] = static_cast<Symbol>(cells[i] % ny_);
    }
    const auto& book = cb_.book;
    std::optional<std::uint64_t> found;
    for (std::uint64_t f = 0; f < book.count(); ++f) {
      if (relay_({x_, y_, book.Codeword(f)})) {
        found = f;
        break;
      }
    }
    TrialOutcome t;
    t.encoded = found.has_value();
    const std::uint64_t flat = found.value_or(0);
    const std::uint64_t wc = flat / book.dims()[1];
    const std::uint64_t wp = flat % book.dims()[1];
    const Decoding d1 = Decode(wc, x_, user1_);
    const Decoding d2 = Decode(wc, y_, user2_);
    const bool ok1 = d1.status == DecodeStatus::kUnique && d1.wp == wp;
    const bool ok2 = d2.status == DecodeStatus::kUnique && d2.wp == wp;
    t.decoded = ok1 && ok2;
    t.misdecoded = (d1.status == DecodeStatus::kUnique && !ok1) ||
                   (d2.status == DecodeStatus::kUnique && !ok2);
    t.k1 = d1.wp;
    t.k2 = d2.wp;
    t.wc = wc;
    return t;
  }

  double LeakageSupport() const {
    const auto& d = cb_.book.dims();
    return static_cast<double>(d[1]) * static_cast<double>(d[1]) * static_cast<double>(d[0]);
  }

 private:
  Decoding Decode(std::uint64_t wc, std::span<const Symbol> own,
                  const TypicalityTest& test) const {
    const auto& book = cb_.book;
    const std::uint64_t np = book.dims()[1];
    Decoding out;
    int found = 0;
    for (std::uint64_t p = 0; p < np; ++p) {
      if (!test({own, book.Codeword(wc * np + p)})) continue;
      if (++found > 1) return {DecodeStatus::kAmbiguous, 0, 0};
      out.wp = p;
    }
    if (found == 0) return {DecodeStatus::kNone, 0, 0};
    out.status = DecodeStatus::kUnique;
    return out;
  }

  const RelayCodebook& cb_;
  TypicalityTest relay_, user1_, user2_;
  std::size_t ny_;
  std::vector<Symbol> x_, y_;
};

// Running totals over trials, weighted by probability (exact) or 1 (MC).
struct Tally {
  double total = 0.0;
  double encoded = 0.0;
  double agreed = 0.0;  // encoded and K1 == K2
  double enc_fail = 0.0;
  double dec_fail = 0.0;
  double misdecode = 0.0;
  double any_error = 0.0;
  Law law;

  void Add(const TrialOutcome& t, double w) {
    total += w;
    if (t.encoded) {
      encoded += w;
      if (t.k1 == t.k2) agreed += w;
      if (!t.decoded) dec_fail += w;
      if (t.misdecoded) misdecode += w;
    } else {
      enc_fail += w;
    }
    if (!t.encoded || !t.decoded || t.k1 != t.k2) any_error += w;
    law[KeyOf(t)] += w;
  }
};

inline constexpr Projection<2> kKeys{0, 1};
inline constexpr Projection<1> kKey1{0};
inline constexpr Projection<2> kUplink{2, 3};
inline constexpr Projection<1> kBroadcast{4};
inline constexpr Projection<1> kPartial1{5};
inline constexpr Projection<1> kPartial2{6};

inline SimReport ReportFrom(const SimConfig& cfg, const SchemeRates& rates, const Tally& t,
                            bool exact, bool leakage_available) {
  SimReport r;
  r.mode = cfg.mode;
  r.n = cfg.n;
  r.eps = cfg.eps;
  r.slack = cfg.slack;
  r.seed = cfg.master_seed;
  r.exact = exact;
  if (cfg.mode == SimMode::kTrusted) {
    r.rk1 = std::max(0.0, rates.ik - cfg.slack);
  } else {
    r.rb = rates.rb;
    r.rk1 = rates.rk1;
    r.rk2 = rates.rk2;
    r.rkz = rates.rkz;
  }
  const double n = static_cast<double>(cfg.n);
  r.agreement_rate = t.encoded > 0.0 ? t.agreed / t.encoded : 0.0;
  r.encoding_failure_rate = t.enc_fail / t.total;
  r.decoding_failure_rate = t.dec_fail / t.total;
  r.misdecode_rate = t.misdecode / t.total;
  r.total_error_rate = t.any_error / t.total;
  r.encoded_mass = t.encoded;
  r.empirical_key_entropy_rate = LawEntropy(Project(t.law, kKey1), t.total) / n;
  if (leakage_available) {
    if (cfg.mode == SimMode::kTrusted) {
      r.leakage_rate = LawMutualInformation(t.law, t.total, kKeys, kBroadcast) / n;
      if (!exact) r.leakage_se = LawMutualInformationSe(t.law, t.total, kKeys, kBroadcast) / n;
    } else {
      r.leakage_rate = LawMutualInformation(t.law, t.total, kKeys, kUplink) / n;
      r.leakage_wc_rate = LawMutualInformation(t.law, t.total, kKeys, kBroadcast) / n;
      if (!exact) r.leakage_se = LawMutualInformationSe(t.law, t.total, kKeys, kUplink) / n;
    }
  }
  if (exact) r.leakage_se = 0.0;
  if (cfg.mode != SimMode::kTrusted) {
    r.partial_key_mi = LawMutualInformation(t.law, t.total, kPartial1, kPartial2) / n;
  }
  return r;
}

inline std::vector<std::size_t> NonzeroCells(const FiniteJoint& source) {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < source.size(); ++c) {
    if (source[c] > 0.0) cells.push_back(c);
  }
  return cells;
}

template <typename Engine>
SimReport Enumerate(const SimConfig& cfg, const SchemeRates& rates, Engine& engine) {
  const double space = std::pow(static_cast<double>(cfg.source.size()), cfg.n);
  if (space > static_cast<double>(cfg.enumeration_cap)) {
    throw Error(ErrorCode::kEnumerationCapExceeded,
                FormatNumber(space) + " source sequences exceed the enumeration cap of " +
                    std::to_string(cfg.enumeration_cap));
  }
  const auto cells = NonzeroCells(cfg.source);
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  std::vector<std::size_t> digit(n, 0);
  std::vector<std::size_t> seq(n, cells[0]);
  Tally tally;
  std::int64_t visited = 0;
  bool done = false;
  while (!done) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= cfg.source[seq[i]];
    tally.Add(engine.Run(seq), p);
    ++visited;
    done = true;
    for (std::size_t i = n; i-- > 0;) {
      if (++digit[i] < cells.size()) {
        seq[i] = cells[digit[i]];
        done = false;
        break;
      }
      digit[i] = 0;
      seq[i] = cells[0];
    }
  }
  SimReport r = ReportFrom(cfg, rates, tally, /*exact=*/true, /*leakage_available=*/true);
  r.trials = visited;
  return r;
}

template <typename Engine>
SimReport Simulate(const SimConfig& cfg, const SchemeRates& rates, Engine& engine) {
  Tally tally;
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  std::vector<std::size_t> seq(n);
  for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(DeriveSeed(cfg.master_seed, Stream::kTrial, static_cast<std::uint64_t>(trial)));
    for (auto& c : seq) c = SampleIndex(rng, cfg.source.probs());
    tally.Add(engine.Run(seq), 1.0);
  }
  const bool leak = engine.LeakageSupport() <= static_cast<double>(cfg.leakage_support_cap);
  SimReport r = ReportFrom(cfg, rates, tally, /*exact=*/false, leak);
  r.trials = cfg.trials;
  return r;
}

}  // namespace internal

// Monte Carlo estimate of the scheme's statistics over cfg.trials i.i.d.
// source draws, with a codebook fixed by cfg.master_seed.
inline SimReport RunMonteCarlo(const SimConfig& cfg) {
  ValidateSimConfig(cfg);
  if (cfg.mode == SimMode::kTrusted) {
    const RelayCodebook cb = BuildRelayCodebook(cfg);
    internal::TrustedEngine engine(cfg, cb);
    return internal::Simulate(cfg, cb.rates, engine);
  }
  const Codebook cb = BuildCodebook(cfg);
  internal::TwoUserEngine engine(cfg, cb);
  return internal::Simulate(cfg, cb.rates, engine);
}

// Exact statistics for the codebook fixed by cfg.master_seed: every source
// sequence is enumerated with its i.i.d. probability.
inline SimReport ExactAnalysis(const SimConfig& cfg) {
  ValidateSimConfig(cfg);
  if (cfg.mode == SimMode::kTrusted) {
    const RelayCodebook cb = BuildRelayCodebook(cfg);
    internal::TrustedEngine engine(cfg, cb);
    return internal::Enumerate(cfg, cb.rates, engine);
  }
  const Codebook cb = BuildCodebook(cfg);
  internal::TwoUserEngine engine(cfg, cb);
  return internal::Enumerate(cfg, cb.rates, engine);
}

// Per-trial record for property checks on the two-user pipeline.
struct TrialRecord {
  bool encoded = false;
  bool decoded = false;
  bool misdecoded = false;
  std::uint64_t k1 = 0;
  std::uint64_t k2 = 0;
};

// Runs cfg.trials Monte Carlo trials and returns each outcome.
inline std::vector<TrialRecord> RunTrials(const SimConfig& cfg) {
  ValidateSimConfig(cfg);
  std::vector<TrialRecord> out;
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  std::vector<std::size_t> seq(n);
  auto run = [&](auto& engine) {
    for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
      Rng rng(DeriveSeed(cfg.master_seed, Stream::kTrial, static_cast<std::uint64_t>(trial)));
      for (auto& c : seq) c = SampleIndex(rng, cfg.source.probs());
      const auto t = engine.Run(seq);
      out.push_back({t.encoded, t.decoded, t.misdecoded, t.k1, t.k2});
    }
  };
  if (cfg.mode == SimMode::kTrusted) {
    const RelayCodebook cb = BuildRelayCodebook(cfg);
    internal::TrustedEngine engine(cfg, cb);
    run(engine);
  } else {
    const Codebook cb = BuildCodebook(cfg);
    internal::TwoUserEngine engine(cfg, cb);
    run(engine);
  }
  return out;
}

}  // namespace relaykey

#endif  // RELAYKEY_PROTOCOL_HPP_
