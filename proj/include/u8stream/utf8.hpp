// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

// Table-driven UTF-8 well-formedness checking, incremental validation and
// decoding.
//
// The validator is the nine-row table of well-formed byte sequences from the
// Unicode standard (section 3.9.3), kept as data so it can be audited row by
// row. Ill-formed input is handled with one of three coping strategies: fail,
// drop the ill-formed section, or replace it. Replacement follows the
// maximal-subpart convention: one replacement code point per maximal subpart.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "u8stream/byte_string.hpp"
#include "u8stream/error.hpp"

namespace u8stream {

inline constexpr char32_t kReplacementCharacter = U'�';
inline constexpr char32_t kMaxCodePoint = 0x10FFFF;

struct OctetRange {
  std::uint8_t lo = 0;
  std::uint8_t hi = 0;

  constexpr bool contains(std::uint8_t b) const noexcept { return b >= lo && b <= hi; }
  friend constexpr bool operator==(OctetRange, OctetRange) = default;
};

inline constexpr OctetRange kContinuation{0x80, 0xBF};

// One row of the well-formedness table: a lead byte range followed by
// `length - 1` continuation ranges.
struct Utf8Row {
  OctetRange lead;
  std::uint8_t length;
  std::array<OctetRange, 3> tail;
};

inline constexpr std::array<Utf8Row, 9> kWellFormedRows{{
    {{0x00, 0x7F}, 1, {}},
    {{0xC2, 0xDF}, 2, {{{0x80, 0xBF}}}},
    {{0xE0, 0xE0}, 3, {{{0xA0, 0xBF}, {0x80, 0xBF}}}},
    {{0xE1, 0xEC}, 3, {{{0x80, 0xBF}, {0x80, 0xBF}}}},
    {{0xED, 0xED}, 3, {{{0x80, 0x9F}, {0x80, 0xBF}}}},
    {{0xEE, 0xEF}, 3, {{{0x80, 0xBF}, {0x80, 0xBF}}}},
    {{0xF0, 0xF0}, 4, {{{0x90, 0xBF}, {0x80, 0xBF}, {0x80, 0xBF}}}},
    {{0xF1, 0xF3}, 4, {{{0x80, 0xBF}, {0x80, 0xBF}, {0x80, 0xBF}}}},
    {{0xF4, 0xF4}, 4, {{{0x80, 0x8F}, {0x80, 0xBF}, {0x80, 0xBF}}}},
}};

namespace detail {

inline constexpr std::array<std::int8_t, 256> make_lead_table() {
  std::array<std::int8_t, 256> table{};
  for (auto& t : table) t = -1;
  for (std::size_t r = 0; r < kWellFormedRows.size(); ++r) {
    for (int b = kWellFormedRows[r].lead.lo; b <= kWellFormedRows[r].lead.hi; ++b) {
      table[b] = static_cast<std::int8_t>(r);
    }
  }
  return table;
}

inline constexpr std::array<std::int8_t, 256> kLeadRow = make_lead_table();

}  // namespace detail

// Row index whose lead range contains b, if any.
constexpr std::optional<std::size_t> lead_row(std::uint8_t b) noexcept {
  auto r = detail::kLeadRow[b];
  if (r < 0) return std::nullopt;
  return static_cast<std::size_t>(r);
}

// Octets C0, C1 and F5..FF occur in no well-formed sequence.
constexpr bool is_never_valid_octet(std::uint8_t b) noexcept {
  return b == 0xC0 || b == 0xC1 || b >= 0xF5;
}

constexpr bool is_continuation_octet(std::uint8_t b) noexcept {
  return kContinuation.contains(b);
}

inline bool is_well_formed(ByteView b) noexcept {
  std::size_t p = 0;
  const std::size_t n = b.size();
  while (p < n) {
    auto r = detail::kLeadRow[b[p]];
    if (r < 0) return false;
    const Utf8Row& row = kWellFormedRows[static_cast<std::size_t>(r)];
    if (n - p < row.length) return false;
    for (std::size_t k = 1; k < row.length; ++k) {
      if (!row.tail[k - 1].contains(b[p + k])) return false;
    }
    p += row.length;
  }
  return true;
}

inline bool is_scalar_value(char32_t cp) noexcept {
  return cp <= kMaxCodePoint && !(cp >= 0xD800 && cp <= 0xDFFF);
}

// "U+0905" style.
inline std::string format_code_point(char32_t cp) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string digits;
  auto v = static_cast<std::uint32_t>(cp);
  do {
    digits.insert(digits.begin(), kDigits[v & 0xF]);
    v >>= 4;
  } while (v != 0);
  while (digits.size() < 4) digits.insert(digits.begin(), '0');
  return "U+" + digits;
}

inline ByteString encode_code_point(char32_t cp) {
  if (!is_scalar_value(cp)) {
    throw Error("not a Unicode scalar value: " + format_code_point(cp));
  }
  if (cp < 0x80) return {static_cast<std::uint8_t>(cp)};
  if (cp < 0x800) {
    return {static_cast<std::uint8_t>(0xC0 | (cp >> 6)),
            static_cast<std::uint8_t>(0x80 | (cp & 0x3F))};
  }
  if (cp < 0x10000) {
    return {static_cast<std::uint8_t>(0xE0 | (cp >> 12)),
            static_cast<std::uint8_t>(0x80 | ((cp >> 6) & 0x3F)),
            static_cast<std::uint8_t>(0x80 | (cp & 0x3F))};
  }
  return {static_cast<std::uint8_t>(0xF0 | (cp >> 18)),
          static_cast<std::uint8_t>(0x80 | ((cp >> 12) & 0x3F)),
          static_cast<std::uint8_t>(0x80 | ((cp >> 6) & 0x3F)),
          static_cast<std::uint8_t>(0x80 | (cp & 0x3F))};
}

// Code point of a single well-formed unit. Precondition: `unit` is exactly one
// row of the table.
inline char32_t unit_code_point(ByteView unit) noexcept {
  switch (unit.size()) {
    case 1:
      return unit[0];
    case 2:
      return (char32_t(unit[0] & 0x1F) << 6) | (unit[1] & 0x3F);
    case 3:
      return (char32_t(unit[0] & 0x0F) << 12) | (char32_t(unit[1] & 0x3F) << 6) |
             (unit[2] & 0x3F);
    default:
      return (char32_t(unit[0] & 0x07) << 18) | (char32_t(unit[1] & 0x3F) << 12) |
             (char32_t(unit[2] & 0x3F) << 6) | (unit[3] & 0x3F);
  }
}

// A validated, well-formed UTF-8 byte sequence together with the offset at
// which each code unit starts. Length is measured in code units.
class CodeUnitSeq {
 public:
  CodeUnitSeq() = default;

  static std::optional<CodeUnitSeq> try_from_bytes(ByteView b) {
    CodeUnitSeq out;
    std::size_t p = 0;
    while (p < b.size()) {
      auto r = lead_row(b[p]);
      if (!r) return std::nullopt;
      const Utf8Row& row = kWellFormedRows[*r];
      if (b.size() - p < row.length) return std::nullopt;
      for (std::size_t k = 1; k < row.length; ++k) {
        if (!row.tail[k - 1].contains(b[p + k])) return std::nullopt;
      }
      out.append_unit_unchecked(b.subspan(p, row.length));
      p += row.length;
    }
    return out;
  }

  static CodeUnitSeq from_bytes(ByteView b) {
    auto seq = try_from_bytes(b);
    if (!seq) throw Utf8Error(0, "byte sequence is not well-formed UTF-8");
    return std::move(*seq);
  }

  static CodeUnitSeq from_string(std::string_view s) {
    return from_bytes(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

  static CodeUnitSeq from_code_points(std::u32string_view cps) {
    CodeUnitSeq out;
    for (char32_t cp : cps) out.push_back(cp);
    return out;
  }

  std::size_t size() const noexcept { return starts_.size(); }
  bool empty() const noexcept { return starts_.empty(); }
  std::size_t byte_size() const noexcept { return bytes_.size(); }
  ByteView bytes() const noexcept { return bytes_; }
  std::string_view view() const noexcept { return as_chars(bytes_); }
  std::string str() const { return std::string(view()); }
  std::span<const std::uint32_t> starts() const noexcept { return starts_; }

  ByteView unit(std::size_t k) const noexcept {
    std::size_t end = k + 1 < starts_.size() ? starts_[k + 1] : bytes_.size();
    return ByteView(bytes_).subspan(starts_[k], end - starts_[k]);
  }
  char32_t code_point(std::size_t k) const noexcept { return unit_code_point(unit(k)); }
  char32_t back() const noexcept { return code_point(size() - 1); }

  std::u32string code_points() const {
    std::u32string out;
    out.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) out.push_back(code_point(k));
    return out;
  }

  std::size_t count(char32_t cp) const noexcept {
    std::size_t n = 0;
    for (std::size_t k = 0; k < size(); ++k) n += code_point(k) == cp;
    return n;
  }

  void push_back(char32_t cp) { append_unit_unchecked(encode_code_point(cp)); }

  void append(const CodeUnitSeq& other) {
    auto base = static_cast<std::uint32_t>(bytes_.size());
    bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
    for (auto s : other.starts_) starts_.push_back(base + s);
  }

  // Units [first, size()).
  CodeUnitSeq suffix(std::size_t first) const {
    CodeUnitSeq out;
    for (std::size_t k = first; k < size(); ++k) out.append_unit_unchecked(unit(k));
    return out;
  }

  friend bool operator==(const CodeUnitSeq& a, const CodeUnitSeq& b) {
    return a.bytes_ == b.bytes_;
  }

 private:
  friend class CodeUnitBuilder;

  void append_unit_unchecked(ByteView unit) {
    starts_.push_back(static_cast<std::uint32_t>(bytes_.size()));
    bytes_.insert(bytes_.end(), unit.begin(), unit.end());
  }

  ByteString bytes_;
  std::vector<std::uint32_t> starts_;
};

// Appends units known to be well-formed; used by the decoder loop.
class CodeUnitBuilder {
 public:
  void unit(ByteView u) { seq_.append_unit_unchecked(u); }
  void code_point(char32_t cp) { seq_.push_back(cp); }
  CodeUnitSeq take() { return std::move(seq_); }

 private:
  CodeUnitSeq seq_;
};

// Incremental form of the well-formedness table.
//
// Invariant: mode == kBoundary  <=>  pending is empty  <=>  remaining == 0.
struct ValidatorState {
  enum class Mode : std::uint8_t { kBoundary, kNeedContinuation };

  Mode mode = Mode::kBoundary;
  std::array<std::uint8_t, 3> pending_bytes{};
  std::uint8_t pending_size = 0;
  OctetRange next_range{};
  std::uint8_t remaining = 0;

  ByteView pending() const noexcept { return ByteView(pending_bytes.data(), pending_size); }
  bool at_boundary() const noexcept { return mode == Mode::kBoundary; }
  // Length of the unit being assembled, 0 at a boundary.
  std::size_t expected_length() const noexcept {
    return at_boundary() ? 0 : pending_size + remaining;
  }

  friend bool operator==(const ValidatorState&, const ValidatorState&) = default;
};

namespace detail {

enum class Step : std::uint8_t {
  kNeedMore,
  kCompleted,
  // The byte itself starts no row; it was consumed and the state is at a boundary.
  kInvalidByte,
  // The pending prefix cannot be extended by this byte. The state was reset
  // to a boundary and the byte was NOT consumed.
  kBrokenPrefix,
};

inline Step advance(ValidatorState& st, std::uint8_t b) noexcept {
  if (st.at_boundary()) {
    auto r = kLeadRow[b];
    if (r < 0) return Step::kInvalidByte;
    const Utf8Row& row = kWellFormedRows[static_cast<std::size_t>(r)];
    if (row.length == 1) return Step::kCompleted;
    st.mode = ValidatorState::Mode::kNeedContinuation;
    st.pending_bytes[0] = b;
    st.pending_size = 1;
    st.next_range = row.tail[0];
    st.remaining = static_cast<std::uint8_t>(row.length - 1);
    return Step::kNeedMore;
  }
  if (!st.next_range.contains(b)) {
    st = ValidatorState{};
    return Step::kBrokenPrefix;
  }
  if (--st.remaining == 0) {
    st = ValidatorState{};
    return Step::kCompleted;
  }
  st.pending_bytes[st.pending_size++] = b;
  st.next_range = kContinuation;
  return Step::kNeedMore;
}

}  // namespace detail

inline CodeUnitSeq single_unit(ByteView u) {
  CodeUnitBuilder b;
  b.unit(u);
  return b.take();
}

struct CompletedUnit {
  CodeUnitSeq unit;
};
struct NeedMore {};
struct IllFormed {
  ByteString rejected;
};
using FeedVerdict = std::variant<CompletedUnit, NeedMore, IllFormed>;

struct FeedResult {
  ValidatorState state;
  FeedVerdict verdict;
  // Set when the pending prefix was rejected: the verdict of re-feeding the
  // byte from a boundary.
  std::optional<FeedVerdict> refeed;
};

inline FeedResult feed(ValidatorState state, std::uint8_t b) {
  auto from_boundary = [b](ValidatorState& st) -> FeedVerdict {
    switch (detail::advance(st, b)) {
      case detail::Step::kCompleted:
        return CompletedUnit{single_unit(ByteView(&b, 1))};
      case detail::Step::kInvalidByte:
        return IllFormed{{b}};
      default:
        return NeedMore{};
    }
  };
  if (state.at_boundary()) {
    FeedVerdict v = from_boundary(state);
    return {state, std::move(v), std::nullopt};
  }
  ByteString before(state.pending().begin(), state.pending().end());
  switch (detail::advance(state, b)) {
    case detail::Step::kNeedMore:
      return {state, NeedMore{}, std::nullopt};
    case detail::Step::kCompleted: {
      before.push_back(b);
      return {state, CompletedUnit{single_unit(before)}, std::nullopt};
    }
    default: {
      FeedVerdict again = from_boundary(state);
      return {state, IllFormed{std::move(before)}, std::move(again)};
    }
  }
}

// Pending bytes left over at end of input form one final maximal subpart.
inline std::optional<ByteString> finish(const ValidatorState& state) {
  if (state.at_boundary()) return std::nullopt;
  return ByteString(state.pending().begin(), state.pending().end());
}

// A maximal ill-formed subpart located in its input.
struct IllFormedSubpart {
  std::size_t offset = 0;
  ByteString bytes;
  // Non-zero when the subpart is a truncated prefix of a unit of this length.
  std::size_t truncated_length = 0;

  friend bool operator==(const IllFormedSubpart&, const IllFormedSubpart&) = default;
};

// Walks `b`, calling sink.unit(ByteView) for each well-formed unit and
// sink.ill_formed(IllFormedSubpart) for each maximal ill-formed subpart, in order.
template <typename Sink>
void decode_into(ByteView b, Sink&& sink) {
  ValidatorState st;
  std::size_t unit_start = 0;
  std::size_t expected = 0;
  std::size_t p = 0;
  while (p < b.size()) {
    if (st.at_boundary()) unit_start = p;
    switch (detail::advance(st, b[p])) {
      case detail::Step::kNeedMore:
        expected = st.expected_length();
        ++p;
        break;
      case detail::Step::kCompleted:
        sink.unit(b.subspan(unit_start, p + 1 - unit_start));
        ++p;
        break;
      case detail::Step::kInvalidByte:
        sink.ill_formed(IllFormedSubpart{p, {b[p]}, 0});
        ++p;
        break;
      case detail::Step::kBrokenPrefix:
        sink.ill_formed(IllFormedSubpart{
            unit_start, ByteString(b.begin() + unit_start, b.begin() + p), expected});
        break;
    }
  }
  if (!st.at_boundary()) {
    sink.ill_formed(IllFormedSubpart{unit_start, ByteString(st.pending().begin(), st.pending().end()),
                                     st.expected_length()});
  }
}

inline std::vector<IllFormedSubpart> ill_formed_subparts(ByteView b) {
  struct Collect {
    std::vector<IllFormedSubpart> out;
    void unit(ByteView) {}
    void ill_formed(IllFormedSubpart s) { out.push_back(std::move(s)); }
  } c;
  decode_into(b, c);
  return std::move(c.out);
}

struct FailEntirely {};
struct DropSection {};
struct ReplaceSection {
  char32_t replacement = kReplacementCharacter;
};
using CopingStrategy = std::variant<FailEntirely, DropSection, ReplaceSection>;

inline CodeUnitSeq decode(ByteView b, const CopingStrategy& strategy = ReplaceSection{}) {
  if (const auto* r = std::get_if<ReplaceSection>(&strategy); r && !is_scalar_value(r->replacement)) {
    throw Error("replacement is not a Unicode scalar value");
  }
  struct Sink {
    const CopingStrategy& strategy;
    CodeUnitBuilder out;
    void unit(ByteView u) { out.unit(u); }
    void ill_formed(const IllFormedSubpart& s) {
      if (std::holds_alternative<FailEntirely>(strategy)) {
        throw Utf8Error(s.offset, "ill-formed UTF-8 at byte offset " + std::to_string(s.offset) +
                                      ": " + to_hex(s.bytes));
      }
      if (const auto* r = std::get_if<ReplaceSection>(&strategy)) out.code_point(r->replacement);
    }
  } sink{strategy, {}};
  decode_into(b, sink);
  return sink.out.take();
}

}  // namespace u8stream
