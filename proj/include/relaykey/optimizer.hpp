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

// Multi-start search over conditional-probability simplices for the largest
// key rate under link-rate caps.
//
// Each search runs a coarse grid over one-parameter channel families, then
// projected coordinate ascent on individual channel rows: the ascent direction
// of a row is a forward finite-difference estimate taken along the feasible
// directions towards each simplex vertex, and steps are projected back onto
// the simplex. Iterates violating a cap are rejected, so every reported point
// is feasible. Results are lower bounds on the true optimum.

#ifndef RELAYKEY_OPTIMIZER_HPP_
#define RELAYKEY_OPTIMIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relaykey/error.hpp"
#include "relaykey/format.hpp"
#include "relaykey/prob.hpp"
#include "relaykey/random.hpp"
#include "relaykey/rate_regions.hpp"

namespace relaykey {

struct OptimizerConfig {
  int restarts = 32;
  int max_iters = 200;
  double convergence_tol = 1e-10;
  // Points per family parameter on [0, 1], endpoints included.
  int grid_resolution = 51;
  std::uint64_t seed = 0x5eed;
};

inline void ValidateConfig(const OptimizerConfig& cfg) {
  if (cfg.restarts < 1) throw Error(ErrorCode::kConfigInvalid, "restarts must be >= 1");
  if (cfg.max_iters < 1) throw Error(ErrorCode::kConfigInvalid, "max_iters must be >= 1");
  if (!(cfg.convergence_tol > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "convergence_tol must be > 0");
  }
  if (cfg.grid_resolution < 2) {
    throw Error(ErrorCode::kConfigInvalid, "grid_resolution must be >= 2");
  }
}

// Upper limits on (R1, R2, Rc); kUnbounded disables a cap.
struct RateCaps {
  double r1 = kUnbounded;
  double r2 = kUnbounded;
  double rc = kUnbounded;

  bool Admits(const RatePoint& p) const {
    return p.r1 <= r1 && p.r2 <= r2 && p.rc <= rc;
  }
};

inline void ValidateCaps(const RateCaps& caps) {
  if (!(caps.r1 >= 0.0) || !(caps.r2 >= 0.0) || !(caps.rc >= 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "rate caps must be >= 0");
  }
}

struct RestartTrace {
  int restart = 0;
  std::uint64_t seed = 0;
  double start_value = 0.0;
  double best_value = 0.0;
  int iterations = 0;
};

struct ChannelSearchResult {
  double best_value = 0.0;
  std::vector<CondChannel> channels;
  std::vector<RestartTrace> restarts;
  std::size_t grid_points = 0;
  std::size_t feasible_grid_points = 0;
};

// Returns the objective at a channel tuple, or nullopt when infeasible.
using ChannelObjective =
    std::function<std::optional<double>(const std::vector<CondChannel>&)>;

inline std::string SerializeChannels(const std::vector<CondChannel>& chs) {
  std::string s;
  for (std::size_t c = 0; c < chs.size(); ++c) {
    if (c) s += ';';
    const auto& t = chs[c].table();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) s += ',';
      s += FormatExact(t[i]);
    }
  }
  return s;
}

namespace internal {

// Euclidean projection onto the probability simplex.
inline std::vector<double> ProjectToSimplex(const std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(0.0, v[i] - theta);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

inline CondChannel WithRow(const CondChannel& ch, std::size_t r,
                           const std::vector<double>& row) {
  std::vector<double> t = ch.table();
  std::copy(row.begin(), row.end(), t.begin() + static_cast<std::ptrdiff_t>(r * ch.cols()));
  return CondChannel(ch.input_sizes(), ch.output_sizes(), std::move(t));
}

inline CondChannel RandomChannelLike(const CondChannel& shape, Rng& rng) {
  std::vector<double> t(shape.table().size());
  for (std::size_t r = 0; r < shape.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < shape.cols(); ++c) {
      const double e = -std::log(1.0 - UniformUnit(rng));
      t[r * shape.cols() + c] = e;
      sum += e;
    }
    for (std::size_t c = 0; c < shape.cols(); ++c) t[r * shape.cols() + c] /= sum;
  }
  return CondChannel(shape.input_sizes(), shape.output_sizes(), std::move(t));
}

inline CondChannel MixChannels(const CondChannel& a, const CondChannel& b, double lambda) {
  std::vector<double> t(a.table().size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = lambda * a.table()[i] + (1.0 - lambda) * b.table()[i];
  }
  // Re-normalize rows so rounding never trips validation.
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) sum += t[r * a.cols() + c];
    for (std::size_t c = 0; c < a.cols(); ++c) t[r * a.cols() + c] /= sum;
  }
  return CondChannel(a.input_sizes(), a.output_sizes(), std::move(t));
}

struct Candidate {
  double value;
  std::vector<CondChannel> channels;
  std::string key;
};

inline bool Better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.key < b.key;
}

// Block coordinate ascent over all channel rows from a feasible start.
inline Candidate Ascend(std::vector<CondChannel> x, double value,
                        const ChannelObjective& f, const OptimizerConfig& cfg,
                        int* iterations) {
  constexpr double kFdStep = 1e-7;
  constexpr int kMaxHalvings = 40;
  std::vector<std::vector<double>> step(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) step[c].assign(x[c].rows(), 0.5);

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    double gained = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const std::size_t k = x[c].cols();
      if (k < 2) continue;
      for (std::size_t r = 0; r < x[c].rows(); ++r) {
        const auto row_span = x[c].row(r);
        const std::vector<double> q(row_span.begin(), row_span.end());
        std::vector<double> d(k, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
          std::vector<double> probe(k);
          for (std::size_t i = 0; i < k; ++i) {
            probe[i] = (1.0 - kFdStep) * q[i] + (i == j ? kFdStep : 0.0);
          }
          auto trial = x;
          trial[c] = WithRow(x[c], r, probe);
          if (auto fv = f(trial)) d[j] = (*fv - value) / kFdStep;
        }
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(k);
        double norm = 0.0;
        for (double& v : d) {
          v -= mean;
          norm += v * v;
        }
        if (norm < 1e-24) continue;

        double s = step[c][r];
        bool accepted = false;
        for (int h = 0; h < kMaxHalvings; ++h, s *= 0.5) {
          std::vector<double> moved(k);
          for (std::size_t i = 0; i < k; ++i) moved[i] = q[i] + s * d[i];
          auto proj = ProjectToSimplex(moved);
          if (proj == q) continue;
          auto trial = x;
          trial[c] = WithRow(x[c], r, proj);
          auto fv = f(trial);
          if (fv && *fv > value) {
            gained += *fv - value;
            value = *fv;
            x = std::move(trial);
            accepted = true;
            break;
          }
        }
        step[c][r] = accepted ? std::min(1.0, 2.0 * s) : 0.5;
      }
    }
    if (gained < cfg.convergence_tol) {
      ++it;
      break;
    }
  }
  *iterations = it;
  Candidate out{value, x, SerializeChannels(x)};
  return out;
}

}  // namespace internal

// Maximizes `f` over channel tuples shaped like `baseline`. `baseline` must be
// feasible; `grid` holds the seeding candidates evaluated before the ascent.
inline ChannelSearchResult MaximizeOverChannels(
    const std::vector<CondChannel>& baseline,
    const std::vector<std::vector<CondChannel>>& grid, const ChannelObjective& f,
    const OptimizerConfig& cfg) {
  ValidateConfig(cfg);
  auto base_value = f(baseline);
  if (!base_value) {
    throw Error(ErrorCode::kConfigInvalid, "baseline channels are infeasible");
  }

  std::vector<internal::Candidate> seeds;
  seeds.push_back({*base_value, baseline, SerializeChannels(baseline)});
  for (const auto& g : grid) {
    if (auto v = f(g)) seeds.push_back({*v, g, SerializeChannels(g)});
  }
  ChannelSearchResult result;
  result.grid_points = grid.size();
  result.feasible_grid_points = seeds.size() - 1;
  std::sort(seeds.begin(), seeds.end(), internal::Better);
  seeds.erase(std::unique(seeds.begin(), seeds.end(),
                          [](const auto& a, const auto& b) { return a.key == b.key; }),
              seeds.end());

  // Half the restarts start from the best distinct grid points, the rest from
  // random rows pulled towards the baseline until feasible.
  const std::size_t grid_starts = std::min<std::size_t>(
      seeds.size(), static_cast<std::size_t>(std::max(1, cfg.restarts / 2)));

  internal::Candidate best = seeds.front();
  for (int r = 0; r < cfg.restarts; ++r) {
    RestartTrace trace;
    trace.restart = r;
    trace.seed = DeriveSeed(cfg.seed, Stream::kOptimizerRestart,
                            static_cast<std::uint64_t>(r));
    std::vector<CondChannel> start;
    double start_value = 0.0;
    if (static_cast<std::size_t>(r) < grid_starts) {
      start = seeds[static_cast<std::size_t>(r)].channels;
      start_value = seeds[static_cast<std::size_t>(r)].value;
    } else {
      Rng rng(trace.seed);
      std::vector<CondChannel> rand;
      for (const auto& b : baseline) rand.push_back(internal::RandomChannelLike(b, rng));
      start = baseline;
      start_value = *base_value;
      double lambda = 1.0;
      for (int h = 0; h < 30; ++h, lambda *= 0.5) {
        std::vector<CondChannel> mixed;
        for (std::size_t c = 0; c < baseline.size(); ++c) {
          mixed.push_back(internal::MixChannels(rand[c], baseline[c], lambda));
        }
        if (auto v = f(mixed)) {
          start = std::move(mixed);
          start_value = *v;
          break;
        }
      }
    }
    trace.start_value = start_value;
    int iterations = 0;
    auto cand = internal::Ascend(std::move(start), start_value, f, cfg, &iterations);
    trace.best_value = cand.value;
    trace.iterations = iterations;
    result.restarts.push_back(trace);
    if (internal::Better(cand, best)) best = std::move(cand);
  }
  result.best_value = best.value;
  result.channels = std::move(best.channels);
  return result;
}

// ---------------------------------------------------------------------------
// Key-rate maximization for the individual regions.

struct InnerOptimum {
  double best_rk = 0.0;
  CondChannel ch1;
  CondChannel ch2;
  InnerEvaluation evaluation;
  ChannelSearchResult search;
};

namespace internal {

inline std::vector<double> UnitGrid(int resolution) {
  std::vector<double> g(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    g[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / static_cast<double>(resolution - 1);
  }
  return g;
}

// Symmetric noise on one coordinate of a tuple input, written into `outputs`
// symbols. `keep` == npos means the whole flattened input.
inline CondChannel NoisyCoordinate(const std::vector<std::size_t>& input_sizes,
                                   std::size_t keep, std::size_t outputs, double t) {
  const std::size_t rows = CheckedProduct(input_sizes, kDefaultTableCap);
  const std::size_t m = keep == static_cast<std::size_t>(-1) ? rows : input_sizes[keep];
  const CondChannel noise = SymmetricNoiseChannel(m, outputs, t);
  const FiniteJoint shape = FiniteJoint::Unchecked(input_sizes, {});
  std::vector<double> table(rows * outputs);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t sym = keep == static_cast<std::size_t>(-1) ? r : shape.Tuple(r)[keep];
    for (std::size_t u = 0; u < outputs; ++u) table[r * outputs + u] = noise(sym, u);
  }
  return CondChannel(input_sizes, {outputs}, std::move(table));
}

inline constexpr std::size_t kWholeInput = static_cast<std::size_t>(-1);

}  // namespace internal

// Largest inner-bound key rate with I(X;U1|Y), I(Y;U2|X) and their maximum
// under the caps, over P(U1|X) P(U2|Y) at the cardinality bounds.
inline InnerOptimum MaxKeyRateInner(const FiniteJoint& source, const RateCaps& caps,
                                    const OptimizerConfig& cfg) {
  ValidateConfig(cfg);
  ValidateCaps(caps);
  if (source.arity() != 2) throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y)");
  const std::size_t nx = source.sizes()[0], ny = source.sizes()[1];
  const std::vector<CondChannel> baseline{ConstantChannel({nx}, nx + 1),
                                          ConstantChannel({ny}, ny + 1)};
  std::vector<std::vector<CondChannel>> grid;
  const auto ts = internal::UnitGrid(cfg.grid_resolution);
  for (double t1 : ts) {
    for (double t2 : ts) {
      grid.push_back({SymmetricNoiseChannel(nx, nx + 1, t1),
                      SymmetricNoiseChannel(ny, ny + 1, t2)});
    }
  }
  ChannelObjective f = [&](const std::vector<CondChannel>& chs) -> std::optional<double> {
    const auto ev = InnerPoint(source, chs[0], chs[1]);
    if (!caps.Admits(ev.point)) return std::nullopt;
    return ev.point.rk;
  };
  InnerOptimum out;
  out.search = MaximizeOverChannels(baseline, grid, f, cfg);
  out.ch1 = out.search.channels[0];
  out.ch2 = out.search.channels[1];
  out.evaluation = InnerPoint(source, out.ch1, out.ch2);
  out.best_rk = out.evaluation.point.rk;
  return out;
}

struct TrustedOptimum {
  double best_rk = 0.0;
  CondChannel ch;
  TrustedPoint point;
  ChannelSearchResult search;
};

// Largest trusted-relay key rate with broadcast rate at most rc_cap, over
// P(V|X,Y) with |V| = |X||Y| + 2.
inline TrustedOptimum MaxKeyRateTrusted(const FiniteJoint& source, double rc_cap,
                                        const OptimizerConfig& cfg) {
  ValidateConfig(cfg);
  if (!(rc_cap >= 0.0)) throw Error(ErrorCode::kConfigInvalid, "rc cap must be >= 0");
  if (source.arity() != 2) throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y)");
  const std::vector<std::size_t> in = source.sizes();
  const std::size_t nv = source.size() + 2;
  const std::vector<CondChannel> baseline{ConstantChannel(in, nv)};
  std::vector<std::vector<CondChannel>> grid;
  for (double t : internal::UnitGrid(cfg.grid_resolution)) {
    grid.push_back({internal::NoisyCoordinate(in, internal::kWholeInput, nv, t)});
    grid.push_back({internal::NoisyCoordinate(in, 0, nv, t)});
    grid.push_back({internal::NoisyCoordinate(in, 1, nv, t)});
  }
  ChannelObjective f = [&](const std::vector<CondChannel>& chs) -> std::optional<double> {
    const auto p = TrustedRegionPoint(source, chs[0]);
    if (p.rc > rc_cap) return std::nullopt;
    return p.rk;
  };
  TrustedOptimum out;
  out.search = MaximizeOverChannels(baseline, grid, f, cfg);
  out.ch = out.search.channels[0];
  out.point = TrustedRegionPoint(source, out.ch);
  out.best_rk = out.point.rk;
  return out;
}

struct CommonOptimum {
  double best_rk = 0.0;
  CondChannel ch1;
  CondChannel ch2;
  RatePoint point;
  ChannelSearchResult search;
};

// Largest common-component inner-bound key rate under the caps, over
// P(U1|X,Z) P(U2|Y,Z) at the cardinality bounds.
inline CommonOptimum MaxKeyRateCommon(const FiniteJoint& source, const RateCaps& caps,
                                      const OptimizerConfig& cfg) {
  ValidateConfig(cfg);
  ValidateCaps(caps);
  if (source.arity() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y, Z)");
  }
  const std::size_t nx = source.sizes()[0], ny = source.sizes()[1],
                    nz = source.sizes()[2];
  const std::vector<std::size_t> in1{nx, nz}, in2{ny, nz};
  const std::size_t n1 = nx * nz + 2, n2 = ny * nz + 2;
  const std::vector<CondChannel> baseline{ConstantChannel(in1, n1),
                                          ConstantChannel(in2, n2)};
  std::vector<std::vector<CondChannel>> grid;
  const auto ts = internal::UnitGrid(cfg.grid_resolution);
  for (std::size_t keep1 : {internal::kWholeInput, std::size_t{1}}) {
    for (std::size_t keep2 : {internal::kWholeInput, std::size_t{1}}) {
      for (double t1 : ts) {
        for (double t2 : ts) {
          grid.push_back({internal::NoisyCoordinate(in1, keep1, n1, t1),
                          internal::NoisyCoordinate(in2, keep2, n2, t2)});
        }
      }
    }
  }
  ChannelObjective f = [&](const std::vector<CondChannel>& chs) -> std::optional<double> {
    const auto p = CommonInnerPoint(source, chs[0], chs[1]);
    if (!caps.Admits(p)) return std::nullopt;
    return p.rk;
  };
  CommonOptimum out;
  out.search = MaximizeOverChannels(baseline, grid, f, cfg);
  out.ch1 = out.search.channels[0];
  out.ch2 = out.search.channels[1];
  out.point = CommonInnerPoint(source, out.ch1, out.ch2);
  out.best_rk = out.point.rk;
  return out;
}

// ---------------------------------------------------------------------------
// Boundary tracing on the symmetric slice R1 = R2 = Rc = c.

struct TracePoint {
  double cap = 0.0;
  RatePoint point;
  double rk_alternate = 0.0;
  std::string channel_id;
};

// Optimizes at every cap, then replaces each point by the best time-shared
// combination of at most two optimized extreme points that fits the cap.
inline std::vector<TracePoint> TraceInnerBoundary(const FiniteJoint& source,
                                                  const std::vector<double>& caps,
                                                  const OptimizerConfig& cfg) {
  struct Extreme {
    RatePoint point;
    double alt;
    double load;  // max(r1, r2, rc)
  };
  std::vector<Extreme> ext;
  for (double c : caps) {
    const auto opt = MaxKeyRateInner(source, RateCaps{c, c, c}, cfg);
    const auto& p = opt.evaluation.point;
    ext.push_back({p, opt.evaluation.rk_alternate, std::max({p.r1, p.r2, p.rc})});
  }
  std::vector<TracePoint> out;
  for (double c : caps) {
    TracePoint best;
    best.cap = c;
    double best_rk = -1.0;
    for (std::size_t i = 0; i < ext.size(); ++i) {
      if (ext[i].load <= c && ext[i].point.rk > best_rk) {
        best_rk = ext[i].point.rk;
        best.point = ext[i].point;
        best.rk_alternate = ext[i].alt;
        best.channel_id = "opt" + std::to_string(i);
      }
      for (std::size_t j = 0; j < ext.size(); ++j) {
        if (!(ext[i].load <= c && ext[j].load > c)) continue;
        const double lambda = (ext[j].load - c) / (ext[j].load - ext[i].load);
        const double rk = lambda * ext[i].point.rk + (1.0 - lambda) * ext[j].point.rk;
        if (rk > best_rk + 1e-15) {
          best_rk = rk;
          best.point = TimeShare(ext[i].point, ext[j].point, lambda);
          best.rk_alternate = lambda * ext[i].alt + (1.0 - lambda) * ext[j].alt;
          best.channel_id = "mix" + std::to_string(i) + "+" + std::to_string(j) + "@" +
                            FormatNumber(lambda);
        }
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

}  // namespace relaykey

#endif  // RELAYKEY_OPTIMIZER_HPP_
