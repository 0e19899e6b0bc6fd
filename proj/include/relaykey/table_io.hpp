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

// Plain-text table formats.
//
// Joint distribution:
//
//   # comment
//   X:2 Y:2
//   0 0 0.45
//   0 1 0.05
//   ...
//
// The header lists `label:size` per variable; each record is an index tuple
// followed by its probability. Tuples that never appear have probability 0.
//
// Conditional channel:
//
//   X:2 | U1:3
//   0 0 0.9
//   0 2 0.1
//   ...
//
// Inputs left of `|`, outputs right of it; each record is the input tuple,
// the output tuple and P(output | input).

#ifndef RELAYKEY_TABLE_IO_HPP_
#define RELAYKEY_TABLE_IO_HPP_

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "relaykey/error.hpp"
#include "relaykey/format.hpp"
#include "relaykey/prob.hpp"

namespace relaykey {

namespace internal {

inline std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::string StripComment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

inline std::size_t ParseIndex(const std::string& tok, int line_no) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line_no) + ": bad index '" + tok + "'");
  }
  return v;
}

inline double ParseProbability(const std::string& tok, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line_no) + ": bad probability '" + tok + "'");
  }
  return v;
}

struct HeaderVar {
  std::string label;
  std::size_t size;
};

inline HeaderVar ParseHeaderVar(const std::string& tok, int line_no) {
  const auto colon = tok.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) +
                                            ": expected label:size, got '" + tok + "'");
  }
  return {tok.substr(0, colon), ParseIndex(tok.substr(colon + 1), line_no)};
}

// Yields non-empty, comment-stripped lines with their 1-based numbers.
template <typename Fn>
void ForEachLine(std::istream& in, Fn&& fn) {
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto toks = SplitWhitespace(StripComment(raw));
    if (!toks.empty()) fn(toks, line_no);
  }
}

inline std::ifstream OpenOrThrow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open '" + path + "'");
  return in;
}

}  // namespace internal

inline FiniteJoint ReadJoint(std::istream& in) {
  std::vector<std::size_t> sizes;
  std::vector<std::string> labels;
  std::vector<double> probs;
  bool have_header = false;
  FiniteJoint shape;
  internal::ForEachLine(in, [&](const std::vector<std::string>& toks, int line_no) {
    if (!have_header) {
      for (const auto& t : toks) {
        auto var = internal::ParseHeaderVar(t, line_no);
        labels.push_back(var.label);
        sizes.push_back(var.size);
      }
      shape = FiniteJoint::Unchecked(sizes, {}, labels);
      probs.assign(internal::CheckedProduct(sizes, kDefaultTableCap), 0.0);
      have_header = true;
      return;
    }
    if (toks.size() != sizes.size() + 1) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(sizes.size()) + " indices and a probability");
    }
    std::vector<std::size_t> tuple;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      tuple.push_back(internal::ParseIndex(toks[i], line_no));
    }
    probs[shape.FlatIndex(tuple)] += internal::ParseProbability(toks.back(), line_no);
  });
  if (!have_header) throw Error(ErrorCode::kParseError, "missing header line");
  return FiniteJoint(std::move(sizes), std::move(probs), std::move(labels));
}

inline FiniteJoint ReadJointFile(const std::string& path) {
  auto in = internal::OpenOrThrow(path);
  return ReadJoint(in);
}

inline CondChannel ReadChannel(std::istream& in) {
  std::vector<std::size_t> in_sizes, out_sizes;
  std::vector<double> table;
  bool have_header = false;
  FiniteJoint in_shape, out_shape;
  std::size_t cols = 0;
  internal::ForEachLine(in, [&](const std::vector<std::string>& toks, int line_no) {
    if (!have_header) {
      bool outputs = false;
      for (const auto& t : toks) {
        if (t == "|") {
          outputs = true;
          continue;
        }
        auto var = internal::ParseHeaderVar(t, line_no);
        (outputs ? out_sizes : in_sizes).push_back(var.size);
      }
      if (!outputs || in_sizes.empty() || out_sizes.empty()) {
        throw Error(ErrorCode::kParseError, "channel header needs inputs | outputs");
      }
      in_shape = FiniteJoint::Unchecked(in_sizes, {});
      out_shape = FiniteJoint::Unchecked(out_sizes, {});
      cols = internal::CheckedProduct(out_sizes, kDefaultTableCap);
      table.assign(internal::CheckedProduct(in_sizes, kDefaultTableCap) * cols, 0.0);
      have_header = true;
      return;
    }
    if (toks.size() != in_sizes.size() + out_sizes.size() + 1) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": wrong field count");
    }
    std::vector<std::size_t> in_t, out_t;
    for (std::size_t i = 0; i < in_sizes.size(); ++i) {
      in_t.push_back(internal::ParseIndex(toks[i], line_no));
    }
    for (std::size_t i = 0; i < out_sizes.size(); ++i) {
      out_t.push_back(internal::ParseIndex(toks[in_sizes.size() + i], line_no));
    }
    table[in_shape.FlatIndex(in_t) * cols + out_shape.FlatIndex(out_t)] +=
        internal::ParseProbability(toks.back(), line_no);
  });
  if (!have_header) throw Error(ErrorCode::kParseError, "missing header line");
  return CondChannel(std::move(in_sizes), std::move(out_sizes), std::move(table));
}

inline CondChannel ReadChannelFile(const std::string& path) {
  auto in = internal::OpenOrThrow(path);
  return ReadChannel(in);
}

// Writes only the nonzero entries.
inline void WriteJoint(std::ostream& out, const FiniteJoint& joint) {
  for (std::size_t i = 0; i < joint.arity(); ++i) {
    out << (i ? " " : "") << joint.labels()[i] << ':' << joint.sizes()[i];
  }
  out << '\n';
  for (std::size_t f = 0; f < joint.size(); ++f) {
    if (joint[f] == 0.0) continue;
    for (std::size_t v : joint.Tuple(f)) out << v << ' ';
    out << FormatExact(joint[f]) << '\n';
  }
}

inline void WriteChannel(std::ostream& out, const CondChannel& ch) {
  const auto in_shape = FiniteJoint::Unchecked(ch.input_sizes(), {});
  const auto out_shape = FiniteJoint::Unchecked(ch.output_sizes(), {});
  for (std::size_t i = 0; i < ch.input_sizes().size(); ++i) {
    out << "I" << i << ':' << ch.input_sizes()[i] << ' ';
  }
  out << '|';
  for (std::size_t i = 0; i < ch.output_sizes().size(); ++i) {
    out << " O" << i << ':' << ch.output_sizes()[i];
  }
  out << '\n';
  for (std::size_t r = 0; r < ch.rows(); ++r) {
    for (std::size_t c = 0; c < ch.cols(); ++c) {
      if (ch(r, c) == 0.0) continue;
      for (std::size_t v : in_shape.Tuple(r)) out << v << ' ';
      for (std::size_t v : out_shape.Tuple(c)) out << v << ' ';
      out << FormatExact(ch(r, c)) << '\n';
    }
  }
}

}  // namespace relaykey

#endif  // RELAYKEY_TABLE_IO_HPP_
