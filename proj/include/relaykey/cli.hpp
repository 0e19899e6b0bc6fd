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

// Command-line front end: flag/config parsing and subcommand dispatch.

#ifndef RELAYKEY_CLI_HPP_
#define RELAYKEY_CLI_HPP_

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relaykey/error.hpp"
#include "relaykey/format.hpp"
#include "relaykey/gaussian.hpp"
#include "relaykey/optimizer.hpp"
#include "relaykey/prob.hpp"
#include "relaykey/protocol.hpp"
#include "relaykey/rate_regions.hpp"
#include "relaykey/selftest.hpp"
#include "relaykey/table_io.hpp"

namespace relaykey {

inline constexpr std::string_view kOutputDirEnv = "RELAYKEY_OUTPUT_DIR";

struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> params;
  // Empty means standard output.
  std::string output_path;
};

namespace cli {

enum class ValueType { kString, kDouble, kRate, kInt, kUnsigned, kBool, kPair, kList };

struct KeySpec {
  ValueType type;
  bool required = false;
};

using KeyTable = std::map<std::string, KeySpec, std::less<>>;

inline KeyTable SimulationKeys(bool monte_carlo) {
  KeyTable t{
      {"mode", {ValueType::kString}},
      {"source", {ValueType::kString, true}},
      {"ch1", {ValueType::kString}},
      {"ch2", {ValueType::kString}},
      {"relay_channel", {ValueType::kString}},
      {"n", {ValueType::kInt, true}},
      {"eps", {ValueType::kDouble}},
      {"slack", {ValueType::kDouble}},
      {"rb", {ValueType::kDouble}},
      {"key_split", {ValueType::kPair}},
      {"rkz", {ValueType::kDouble}},
      {"master_seed", {ValueType::kUnsigned}},
      {"codebook_cap", {ValueType::kUnsigned}},
      {"enumeration_cap", {ValueType::kUnsigned}},
  };
  if (monte_carlo) {
    t.emplace("trials", KeySpec{ValueType::kInt});
    t.emplace("leakage_support_cap", KeySpec{ValueType::kUnsigned});
    t.emplace("with_exact", KeySpec{ValueType::kBool});
  } else {
    t.emplace("dump_codebook", KeySpec{ValueType::kString});
  }
  return t;
}

inline const std::map<std::string, KeyTable, std::less<>>& Subcommands() {
  static const auto* table = new std::map<std::string, KeyTable, std::less<>>{
      {"region",
       {
           {"bound", {ValueType::kString, true}},
           {"source", {ValueType::kString, true}},
           {"ch1", {ValueType::kString}},
           {"ch2", {ValueType::kString}},
           {"ch", {ValueType::kString}},
           {"cardinality", {ValueType::kString}},
           {"optimize", {ValueType::kBool}},
           {"r1cap", {ValueType::kRate}},
           {"r2cap", {ValueType::kRate}},
           {"rccap", {ValueType::kRate}},
           {"trace", {ValueType::kList}},
           {"opt_trace", {ValueType::kString}},
           {"restarts", {ValueType::kInt}},
           {"max_iters", {ValueType::kInt}},
           {"convergence_tol", {ValueType::kDouble}},
           {"grid_resolution", {ValueType::kInt}},
           {"seed", {ValueType::kUnsigned}},
       }},
      {"gaussian",
       {
           {"mode", {ValueType::kString, true}},
           {"rho", {ValueType::kDouble, true}},
           {"r1", {ValueType::kRate}},
           {"r2", {ValueType::kRate}},
           {"rc", {ValueType::kRate}},
           {"nq1", {ValueType::kDouble}},
           {"nq2", {ValueType::kDouble}},
           {"beta_max", {ValueType::kDouble}},
           {"alpha", {ValueType::kDouble}},
           {"points", {ValueType::kInt}},
       }},
      {"simulate", SimulationKeys(true)},
      {"exact", SimulationKeys(false)},
      {"compare",
       {
           {"rho", {ValueType::kDouble, true}},
           {"r1", {ValueType::kRate, true}},
           {"r2", {ValueType::kRate, true}},
           {"rc", {ValueType::kRate, true}},
       }},
      {"selftest",
       {
           {"seed", {ValueType::kUnsigned}},
           {"instances", {ValueType::kInt}},
       }},
  };
  return *table;
}

inline std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> ParseDouble(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<double> ParseRate(std::string_view s) {
  if (s == "inf" || s == "unbounded") return kUnbounded;
  auto v = ParseDouble(s);
  if (v && std::isnan(*v)) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> ParseInteger(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<bool> ParseBool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

inline std::vector<std::string> SplitOn(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(std::string(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool TypeChecks(ValueType type, const std::string& v) {
  switch (type) {
    case ValueType::kString: return !v.empty();
    case ValueType::kDouble: return ParseDouble(v).has_value();
    case ValueType::kRate: return ParseRate(v).has_value();
    case ValueType::kInt: return ParseInteger<std::int64_t>(v).has_value();
    case ValueType::kUnsigned: return ParseInteger<std::uint64_t>(v).has_value();
    case ValueType::kBool: return ParseBool(v).has_value();
    case ValueType::kPair: {
      const auto parts = SplitOn(v, ',');
      return parts.size() == 2 && ParseDouble(parts[0]) && ParseDouble(parts[1]);
    }
    case ValueType::kList: {
      for (const auto& p : SplitOn(v, ',')) {
        if (!ParseRate(p)) return false;
      }
      return true;
    }
  }
  return false;
}

inline void ReadConfigFile(const std::string& path, std::map<std::string, std::string>& out) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out[Trim(std::string_view(t).substr(0, eq))] = Trim(std::string_view(t).substr(eq + 1));
  }
}

}  // namespace cli

// Resolves flags and an optional --config file into a RunConfig. Flags take
// the form `--key value` or `--key=value`; a boolean flag may omit its value.
// Flag values override file values.
inline RunConfig ParseConfig(const std::vector<std::string>& args) {
  if (args.empty()) throw Error(ErrorCode::kMissingKey, "subcommand");
  RunConfig cfg;
  cfg.subcommand = args[0];
  const auto& subs = cli::Subcommands();
  const auto sub = subs.find(cfg.subcommand);
  if (sub == subs.end()) throw Error(ErrorCode::kUnknownKey, cfg.subcommand);
  const cli::KeyTable& keys = sub->second;

  std::map<std::string, std::string> flags;
  std::optional<std::string> config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) {
      throw Error(ErrorCode::kUnknownKey, a);
    }
    std::string key = a.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0) {
      value = args[++i];
    } else {
      const auto k = keys.find(key);
      if (k == keys.end() || k->second.type != cli::ValueType::kBool) {
        if (k == keys.end() && key != "out" && key != "config") {
          throw Error(ErrorCode::kUnknownKey, key);
        }
        throw Error(ErrorCode::kTypeError, key);
      }
      value = "true";
    }
    if (key == "config") {
      config_path = value;
    } else {
      flags[key] = value;
    }
  }

  std::map<std::string, std::string> merged;
  if (config_path) cli::ReadConfigFile(*config_path, merged);
  for (auto& [k, v] : flags) merged[k] = v;

  for (auto& [k, v] : merged) {
    if (k == "out") {
      if (v.empty()) throw Error(ErrorCode::kTypeError, k);
      cfg.output_path = v;
      continue;
    }
    const auto spec = keys.find(k);
    if (spec == keys.end()) throw Error(ErrorCode::kUnknownKey, k);
    if (!cli::TypeChecks(spec->second.type, v)) throw Error(ErrorCode::kTypeError, k);
    cfg.params[k] = v;
  }
  for (const auto& [k, spec] : keys) {
    if (spec.required && !cfg.params.count(k)) throw Error(ErrorCode::kMissingKey, k);
  }
  return cfg;
}

namespace cli {

// Typed access to a parsed RunConfig.
class Params {
 public:
  explicit Params(const RunConfig& cfg) : p_(cfg.params) {}

  bool Has(const std::string& k) const { return p_.count(k) > 0; }

  std::string String(const std::string& k, std::string def = "") const {
    auto it = p_.find(k);
    return it == p_.end() ? def : it->second;
  }
  double Double(const std::string& k, double def) const {
    auto it = p_.find(k);
    return it == p_.end() ? def : Require(ParseDouble(it->second), k);
  }
  double Rate(const std::string& k, double def) const {
    auto it = p_.find(k);
    return it == p_.end() ? def : Require(ParseRate(it->second), k);
  }
  std::int64_t Int(const std::string& k, std::int64_t def) const {
    auto it = p_.find(k);
    return it == p_.end() ? def : Require(ParseInteger<std::int64_t>(it->second), k);
  }
  std::uint64_t Unsigned(const std::string& k, std::uint64_t def) const {
    auto it = p_.find(k);
    return it == p_.end() ? def : Require(ParseInteger<std::uint64_t>(it->second), k);
  }
  bool Bool(const std::string& k, bool def) const {
    auto it = p_.find(k);
    return it == p_.end() ? def : Require(ParseBool(it->second), k);
  }
  std::vector<double> List(const std::string& k) const {
    std::vector<double> out;
    auto it = p_.find(k);
    if (it == p_.end()) return out;
    for (const auto& s : SplitOn(it->second, ',')) out.push_back(Require(ParseRate(s), k));
    return out;
  }
  std::optional<std::pair<double, double>> Pair(const std::string& k) const {
    auto it = p_.find(k);
    if (it == p_.end()) return std::nullopt;
    const auto parts = SplitOn(it->second, ',');
    return std::make_pair(Require(ParseDouble(parts[0]), k), Require(ParseDouble(parts[1]), k));
  }
  int Narrow(const std::string& k, std::int64_t def) const {
    const std::int64_t v = Int(k, def);
    if (v < INT32_MIN || v > INT32_MAX) throw Error(ErrorCode::kTypeError, k);
    return static_cast<int>(v);
  }

 private:
  template <typename T>
  static T Require(const std::optional<T>& v, const std::string& k) {
    if (!v) throw Error(ErrorCode::kTypeError, k);
    return *v;
  }

  const std::map<std::string, std::string>& p_;
};

// Sources: `dsbs:p`, `common:a:b`, or a joint table file.
inline FiniteJoint ParseSource(const std::string& s) {
  const auto parts = SplitOn(s, ':');
  if (parts[0] == "dsbs" && parts.size() == 2) {
    if (auto p = ParseDouble(parts[1])) return Dsbs(*p);
    throw Error(ErrorCode::kTypeError, "source");
  }
  if (parts[0] == "common" && parts.size() == 3) {
    auto a = ParseDouble(parts[1]), b = ParseDouble(parts[2]);
    if (a && b) return CommonMarkovSource(*a, *b);
    throw Error(ErrorCode::kTypeError, "source");
  }
  return ReadJointFile(s);
}

// Channels: `identity`, `constant`, `bsc:p`, `noise:t`, a coordinate name
// from `names` (projection onto that input), or a channel table file.
inline CondChannel ParseChannel(const std::string& s, const std::vector<std::size_t>& inputs,
                                const std::vector<std::string>& names, const std::string& key) {
  std::size_t rows = 1;
  for (auto v : inputs) rows *= v;
  const auto parts = SplitOn(s, ':');
  auto reshape = [&](const CondChannel& ch) {
    return CondChannel(inputs, ch.output_sizes(), ch.table());
  };
  if (s == "identity") {
    std::vector<double> t(rows * rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) t[r * rows + r] = 1.0;
    return CondChannel(inputs, {rows}, std::move(t));
  }
  if (s == "constant") return ConstantChannel(inputs, 1);
  if (parts[0] == "bsc" && parts.size() == 2) {
    auto p = ParseDouble(parts[1]);
    if (!p) throw Error(ErrorCode::kTypeError, key);
    if (rows != 2) throw Error(ErrorCode::kShapeMismatch, key + ": bsc needs a binary input");
    return reshape(BinarySymmetricChannel(*p));
  }
  if (parts[0] == "noise" && parts.size() == 2) {
    auto t = ParseDouble(parts[1]);
    if (!t) throw Error(ErrorCode::kTypeError, key);
    return reshape(SymmetricNoiseChannel(rows, rows + 1, *t));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (s == names[i]) return ProjectionChannel(inputs, i, inputs[i]);
  }
  CondChannel ch = ReadChannelFile(s);
  if (ch.rows() != rows) {
    throw Error(ErrorCode::kShapeMismatch, key + ": channel has " + std::to_string(ch.rows()) +
                                               " rows, expected " + std::to_string(rows));
  }
  return ch;
}

inline std::filesystem::path ResolveOutput(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(std::string(kOutputDirEnv).c_str()); dir && *dir) {
      p = std::filesystem::path(dir) / p;
    }
  }
  return p;
}

inline std::ofstream OpenOutput(const std::string& path) {
  const auto p = ResolveOutput(path);
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::kParseError, "cannot open output file " + p.string());
  return f;
}

inline OptimizerConfig OptimizerFrom(const Params& p) {
  OptimizerConfig c;
  c.restarts = p.Narrow("restarts", c.restarts);
  c.max_iters = p.Narrow("max_iters", c.max_iters);
  c.convergence_tol = p.Double("convergence_tol", c.convergence_tol);
  c.grid_resolution = p.Narrow("grid_resolution", c.grid_resolution);
  c.seed = p.Unsigned("seed", c.seed);
  return c;
}

inline void WriteRegionRow(std::ostream& out, std::string_view bound, std::optional<double> r1,
                           std::optional<double> r2, double rc, double rk,
                           std::optional<double> alt, std::string_view id) {
  out << bound << ',' << FormatNumber(r1) << ',' << FormatNumber(r2) << ','
      << FormatNumber(rc) << ',' << FormatNumber(rk) << ',' << FormatNumber(alt) << ','
      << id << '\n';
}

inline void WriteRestarts(const std::string& path, const ChannelSearchResult& search) {
  auto f = OpenOutput(path);
  f << "restart,seed,start_rk,best_rk,iterations\n";
  for (const auto& r : search.restarts) {
    f << r.restart << ',' << r.seed << ',' << FormatNumber(r.start_value) << ','
      << FormatNumber(r.best_value) << ',' << r.iterations << '\n';
  }
}

inline void RunRegion(const Params& p, std::ostream& out) {
  const std::string bound = p.String("bound");
  const FiniteJoint source = ParseSource(p.String("source"));
  const std::string card = p.String("cardinality", "enforce");
  if (card != "enforce" && card != "skip") throw Error(ErrorCode::kTypeError, "cardinality");
  const CardinalityCheck check =
      card == "skip" ? CardinalityCheck::kSkip : CardinalityCheck::kEnforce;
  const bool optimize = p.Bool("optimize", false);
  const RateCaps caps{p.Rate("r1cap", kUnbounded), p.Rate("r2cap", kUnbounded),
                      p.Rate("rccap", kUnbounded)};
  const OptimizerConfig opt = OptimizerFrom(p);
  const bool common = bound == "common";
  if (bound != "inner" && bound != "outer" && bound != "common" && bound != "trusted" &&
      bound != "reduced") {
    throw Error(ErrorCode::kTypeError, "bound");
  }
  if (common != (source.arity() == 3)) {
    throw Error(ErrorCode::kShapeMismatch,
                common ? "common bound needs a source over (X, Y, Z)"
                       : "source must be over (X, Y)");
  }
  const auto& sz = source.sizes();
  auto ch1 = [&] {
    return common ? ParseChannel(p.String("ch1", "identity"), {sz[0], sz[2]}, {"x", "z"}, "ch1")
                  : ParseChannel(p.String("ch1", "identity"), {sz[0]}, {"x"}, "ch1");
  };
  auto ch2 = [&] {
    return common ? ParseChannel(p.String("ch2", "identity"), {sz[1], sz[2]}, {"y", "z"}, "ch2")
                  : ParseChannel(p.String("ch2", "identity"), {sz[1]}, {"y"}, "ch2");
  };

  out << "bound,r1,r2,rc,rk,rk_alternate,channel_id\n";
  const auto trace = p.List("trace");
  if (!trace.empty()) {
    if (bound != "inner") throw Error(ErrorCode::kConfigInvalid, "trace supports bound=inner");
    for (const auto& t : TraceInnerBoundary(source, trace, opt)) {
      WriteRegionRow(out, bound, t.point.r1, t.point.r2, t.point.rc, t.point.rk,
                     t.rk_alternate, t.channel_id);
    }
    return;
  }
  if (optimize) {
    std::optional<ChannelSearchResult> search;
    if (bound == "inner") {
      const auto o = MaxKeyRateInner(source, caps, opt);
      const auto& q = o.evaluation.point;
      WriteRegionRow(out, bound, q.r1, q.r2, q.rc, q.rk, o.evaluation.rk_alternate, "opt");
      search = o.search;
    } else if (bound == "common") {
      const auto o = MaxKeyRateCommon(source, caps, opt);
      WriteRegionRow(out, bound, o.point.r1, o.point.r2, o.point.rc, o.point.rk, std::nullopt,
                     "opt");
      search = o.search;
    } else if (bound == "trusted") {
      const auto o = MaxKeyRateTrusted(source, caps.rc, opt);
      WriteRegionRow(out, bound, std::nullopt, std::nullopt, o.point.rc, o.point.rk,
                     std::nullopt, "opt");
      search = o.search;
    } else {
      throw Error(ErrorCode::kConfigInvalid, "optimize supports inner, common and trusted");
    }
    if (p.Has("opt_trace")) WriteRestarts(p.String("opt_trace"), *search);
    return;
  }
  if (bound == "inner") {
    const auto e = InnerPoint(source, ch1(), ch2(), check);
    WriteRegionRow(out, bound, e.point.r1, e.point.r2, e.point.rc, e.point.rk, e.rk_alternate,
                   "given");
  } else if (bound == "outer") {
    const CondChannel ch = p.Has("ch")
                               ? ParseChannel(p.String("ch"), {sz[0], sz[1]}, {}, "ch")
                               : ProductChannel(ch1(), ch2());
    const auto q = OuterPoint(source, ch);
    WriteRegionRow(out, bound, q.r1, q.r2, q.rc, q.rk, std::nullopt, "given");
  } else if (bound == "common") {
    const auto q = CommonInnerPoint(source, ch1(), ch2(), check);
    WriteRegionRow(out, bound, q.r1, q.r2, q.rc, q.rk, std::nullopt, "given");
  } else if (bound == "trusted") {
    const CondChannel ch =
        ParseChannel(p.String("ch", "identity"), {sz[0], sz[1]}, {"x", "y"}, "ch");
    const auto q = TrustedRegionPoint(source, ch, check);
    WriteRegionRow(out, bound, std::nullopt, std::nullopt, q.rc, q.rk, std::nullopt, "given");
  } else {
    const auto q = TrustedReducedInnerPoint(source, ch1(), ch2());
    WriteRegionRow(out, bound, std::nullopt, std::nullopt, q.rc, q.rk, q.rk_alternate, "given");
  }
}

inline void RunGaussian(const Params& p, std::ostream& out) {
  const std::string mode = p.String("mode");
  const double rho = p.Double("rho", 0.0);
  if (mode == "point") {
    out << "rho,nq1,nq2,r1,r2,rc,rk\n";
    if (p.Has("nq1") || p.Has("nq2")) {
      const GaussianParams g{rho, p.Double("nq1", 1.0), p.Double("nq2", 1.0)};
      const RatePoint q = GaussianInnerPoint(g);
      out << FormatNumber(rho) << ',' << FormatNumber(g.nq1) << ',' << FormatNumber(g.nq2)
          << ',' << FormatNumber(q.r1) << ',' << FormatNumber(q.r2) << ','
          << FormatNumber(q.rc) << ',' << FormatNumber(q.rk) << '\n';
      return;
    }
    for (const char* k : {"r1", "r2", "rc"}) {
      if (!p.Has(k)) throw Error(ErrorCode::kMissingKey, k);
    }
    const double r1 = p.Rate("r1", 0), r2 = p.Rate("r2", 0), rc = p.Rate("rc", 0);
    const double rk = MaxKeyRateGaussian(rho, r1, r2, rc);
    auto noise = [&](double ri) -> std::optional<double> {
      const double m = std::min(ri, rc);
      if (std::isinf(m)) return 0.0;
      if (m <= 0.0) return std::nullopt;
      return NoiseForRates(rho, ri, rc);
    };
    out << FormatNumber(rho) << ',' << FormatNumber(noise(r1)) << ','
        << FormatNumber(noise(r2)) << ',' << FormatNumber(r1) << ',' << FormatNumber(r2) << ','
        << FormatNumber(rc) << ',' << FormatNumber(rk) << '\n';
    return;
  }
  if (mode != "alpha" && mode != "beta") throw Error(ErrorCode::kTypeError, "mode");
  SweepParams s;
  s.rho = rho;
  s.r1 = p.Rate("r1", s.r1);
  s.r2 = p.Rate("r2", s.r2);
  s.rc = p.Rate("rc", s.rc);
  s.beta_max = p.Double("beta_max", s.beta_max);
  s.alpha = p.Double("alpha", s.alpha);
  s.points = p.Narrow("points", s.points);
  const SweepMode m = mode == "alpha" ? SweepMode::kAlpha : SweepMode::kBeta;
  out << SweepHeader(m) << '\n';
  for (const auto& r : Figure2Sweep(m, s)) {
    out << FormatNumber(r.x) << ',' << FormatNumber(r.rk) << ',' << FormatNumber(r.c1to2)
        << ',' << FormatNumber(r.c2to1) << ',' << FormatNumber(r.cstar) << '\n';
  }
}

inline void RunCompare(const Params& p, std::ostream& out) {
  const double rho = p.Double("rho", 0), r1 = p.Rate("r1", 0), r2 = p.Rate("r2", 0),
               rc = p.Rate("rc", 0);
  const double rk = MaxKeyRateGaussian(rho, r1, r2, rc);
  const double c12 = OneWayCapacity(rho, r1, rc);
  const double c21 = OneWayCapacity(rho, r2, rc);
  out << "rho,r1,r2,rc,rk,c1to2,c2to1,strict\n";
  out << FormatNumber(rho) << ',' << FormatNumber(r1) << ',' << FormatNumber(r2) << ','
      << FormatNumber(rc) << ',' << FormatNumber(rk) << ',' << FormatNumber(c12) << ','
      << FormatNumber(c21) << ',' << (rk > std::max(c12, c21) ? "true" : "false") << '\n';
}

inline SimConfig SimConfigFrom(const Params& p) {
  SimConfig c;
  const auto mode = ParseSimMode(p.String("mode", "untrusted"));
  if (!mode) throw Error(ErrorCode::kTypeError, "mode");
  c.mode = *mode;
  c.source = ParseSource(p.String("source"));
  const auto& sz = c.source.sizes();
  if (c.mode == SimMode::kCommon) {
    if (sz.size() != 3) throw Error(ErrorCode::kShapeMismatch, "common mode needs (X, Y, Z)");
    c.ch1 = ParseChannel(p.String("ch1", "identity"), {sz[0], sz[2]}, {"x", "z"}, "ch1");
    c.ch2 = ParseChannel(p.String("ch2", "identity"), {sz[1], sz[2]}, {"y", "z"}, "ch2");
  } else {
    if (sz.size() != 2) throw Error(ErrorCode::kShapeMismatch, "source must be over (X, Y)");
    if (c.mode == SimMode::kTrusted) {
      c.relay_channel = ParseChannel(p.String("relay_channel", "identity"), {sz[0], sz[1]},
                                     {"x", "y"}, "relay_channel");
    } else {
      c.ch1 = ParseChannel(p.String("ch1", "identity"), {sz[0]}, {"x"}, "ch1");
      c.ch2 = ParseChannel(p.String("ch2", "identity"), {sz[1]}, {"y"}, "ch2");
    }
  }
  c.n = p.Narrow("n", c.n);
  c.eps = p.Double("eps", c.eps);
  c.slack = p.Double("slack", c.slack);
  if (p.Has("rb")) c.rb = p.Double("rb", 0.0);
  c.key_split = p.Pair("key_split");
  if (p.Has("rkz")) c.rkz = p.Double("rkz", 0.0);
  c.trials = p.Int("trials", c.trials);
  c.master_seed = p.Unsigned("master_seed", c.master_seed);
  c.codebook_cap = p.Unsigned("codebook_cap", c.codebook_cap);
  c.enumeration_cap = p.Unsigned("enumeration_cap", c.enumeration_cap);
  c.leakage_support_cap = p.Unsigned("leakage_support_cap", c.leakage_support_cap);
  return c;
}

inline void RunSimulate(const Params& p, std::ostream& out) {
  const SimConfig c = SimConfigFrom(p);
  const SimReport mc = RunMonteCarlo(c);
  std::optional<SimReport> exact;
  if (p.Bool("with_exact", false)) exact = ExactAnalysis(c);
  out << kSimReportHeader << '\n';
  WriteSimReportRow(out, mc);
  if (exact) WriteSimReportRow(out, *exact);
}

inline void RunExact(const Params& p, std::ostream& out) {
  const SimConfig c = SimConfigFrom(p);
  const SimReport r = ExactAnalysis(c);
  if (p.Has("dump_codebook")) {
    auto f = OpenOutput(p.String("dump_codebook"));
    if (c.mode == SimMode::kTrusted) {
      WriteCodebookDump(f, BuildRelayCodebook(c));
    } else {
      WriteCodebookDump(f, BuildCodebook(c));
    }
  }
  out << kSimReportHeader << '\n';
  WriteSimReportRow(out, r);
}

inline bool RunSelfTestCommand(const Params& p, std::ostream& out) {
  const auto results = RunSelfTest(p.Unsigned("seed", 1), p.Narrow("instances", 200));
  WriteSelfTest(out, results);
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

inline bool IsUsageError(ErrorCode c) {
  return c == ErrorCode::kUnknownKey || c == ErrorCode::kMissingKey ||
         c == ErrorCode::kTypeError;
}

}  // namespace cli

// Runs the subcommand. Returns 0 on success, 1 on a computational error, 2 on
// a usage error; diagnostics go to `err`.
inline int Dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const cli::Params p(cfg);
    std::ostringstream buf;
    bool ok = true;
    if (cfg.subcommand == "region") {
      cli::RunRegion(p, buf);
    } else if (cfg.subcommand == "gaussian") {
      cli::RunGaussian(p, buf);
    } else if (cfg.subcommand == "simulate") {
      cli::RunSimulate(p, buf);
    } else if (cfg.subcommand == "exact") {
      cli::RunExact(p, buf);
    } else if (cfg.subcommand == "compare") {
      cli::RunCompare(p, buf);
    } else if (cfg.subcommand == "selftest") {
      ok = cli::RunSelfTestCommand(p, buf);
    } else {
      throw Error(ErrorCode::kUnknownKey, cfg.subcommand);
    }
    if (cfg.output_path.empty()) {
      out << buf.str();
    } else {
      auto f = cli::OpenOutput(cfg.output_path);
      f << buf.str();
    }
    if (!ok) err << "selftest: one or more checks failed\n";
    return ok ? 0 : 1;
  } catch (const Error& e) {
    err << (cli::IsUsageError(e.code()) ? "usage error: " : "error: ") << e.what() << '\n';
    return cli::IsUsageError(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

// Parses and dispatches `args` (without the program name).
inline int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = ParseConfig(args);
  } catch (const Error& e) {
    err << (cli::IsUsageError(e.code()) ? "usage error: " : "error: ") << e.what() << '\n';
    if (args.empty()) {
      err << "usage: relaykey <region|gaussian|simulate|exact|compare|selftest> "
             "[--key value ...] [--config file] [--out file]\n";
    }
    return cli::IsUsageError(e.code()) ? 2 : 1;
  }
  return Dispatch(cfg, out, err);
}

}  // namespace relaykey

#endif  // RELAYKEY_CLI_HPP_
