// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace u8stream {

// Raw octets. Never assumed to be valid text.
using ByteString = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteString to_bytes(std::string_view s) {
  return ByteString(s.begin(), s.end());
}

inline std::string_view as_chars(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

inline ByteString concat(ByteView a, ByteView b) {
  ByteString out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Uppercase hex pairs separated by single spaces, e.g. "E0 A4 85".
inline std::string to_hex(ByteView b, char sep = ' ') {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(b.size() * 3);
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (k > 0 && sep != '\0') out.push_back(sep);
    out.push_back(kDigits[b[k] >> 4]);
    out.push_back(kDigits[b[k] & 0xF]);
  }
  return out;
}

inline std::optional<int> hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return std::nullopt;
}

// Parses hex pairs, ignoring spaces. Returns nullopt on odd length or a bad digit.
inline std::optional<ByteString> from_hex(std::string_view hex) {
  ByteString out;
  std::optional<int> high;
  for (char c : hex) {
    if (c == ' ') continue;
    auto d = hex_digit(c);
    if (!d) return std::nullopt;
    if (high) {
      out.push_back(static_cast<std::uint8_t>(*high << 4 | *d));
      high.reset();
    } else {
      high = d;
    }
  }
  if (high) return std::nullopt;
  return out;
}

struct ByteStringHash {
  std::size_t operator()(const ByteString& b) const noexcept {
    return std::hash<std::string_view>{}(as_chars(b));
  }
};

}  // namespace u8stream
