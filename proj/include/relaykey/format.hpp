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

// Locale-independent number formatting for CSV output.

#ifndef RELAYKEY_FORMAT_HPP_
#define RELAYKEY_FORMAT_HPP_

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <system_error>

namespace relaykey {

inline constexpr int kCsvSignificantDigits = 9;

// Nine significant digits, '.' separator, "inf"/"-inf" for infinities.
inline std::string FormatNumber(double v) {
  if (v == 0.0) v = 0.0;  // collapse -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general,
                                 kCsvSignificantDigits);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

inline std::string FormatNumber(const std::optional<double>& v) {
  return v ? FormatNumber(*v) : std::string("NA");
}

// Shortest representation that round-trips.
inline std::string FormatExact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace relaykey

#endif  // RELAYKEY_FORMAT_HPP_
