// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

#include "u8stream/utf8.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

namespace u8stream {
namespace {

using testing::RowMatcher;

TEST(IsWellFormed, Examples) {
  EXPECT_TRUE(is_well_formed(ByteString{}));
  EXPECT_TRUE(is_well_formed(ByteString{0x41}));
  EXPECT_TRUE(is_well_formed(ByteString{0xE0, 0xA4, 0x85}));
  EXPECT_FALSE(is_well_formed(ByteString{0xE0, 0xA4}));
  EXPECT_FALSE(is_well_formed(ByteString{0xC0}));
  EXPECT_FALSE(is_well_formed(ByteString{0xF5}));
  EXPECT_FALSE(is_well_formed(ByteString{0xED, 0xA0, 0x80}));
  EXPECT_TRUE(is_well_formed(ByteString{0xF4, 0x8F, 0xBF, 0xBF}));
}

TEST(IsWellFormed, MaxScalarAgreesWithPlatform) {
  testing::IconvValidator iconv;
  ASSERT_TRUE(iconv.valid());
  EXPECT_TRUE(iconv.is_well_formed(ByteString{0xF4, 0x8F, 0xBF, 0xBF}));
  EXPECT_FALSE(iconv.is_well_formed(ByteString{0xF4, 0x90, 0x80, 0x80}));
  EXPECT_FALSE(is_well_formed(ByteString{0xF4, 0x90, 0x80, 0x80}));
}

TEST(IsWellFormed, ExhaustiveUpToTwoBytesMatchesRowMatcher) {
  RowMatcher rows;
  EXPECT_EQ(is_well_formed(ByteString{}), rows.matches(ByteString{}));
  for (int a = 0; a < 256; ++a) {
    ByteString one{static_cast<std::uint8_t>(a)};
    ASSERT_EQ(is_well_formed(one), rows.matches(one)) << a;
    for (int b = 0; b < 256; ++b) {
      ByteString two{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)};
      ASSERT_EQ(is_well_formed(two), rows.matches(two)) << a << ' ' << b;
    }
  }
}

TEST(IsWellFormed, ContinuationOnlyStringsNeverWellFormed) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t n = 1 + rng() % 8;
    ByteString b;
    for (std::size_t k = 0; k < n; ++k) b.push_back(static_cast<std::uint8_t>(0x80 + rng() % 0x40));
    ASSERT_FALSE(is_well_formed(b));
  }
}

TEST(IsWellFormed, ClosedUnderConcatenation) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint32_t> cp(0, 0x10FFFF);
  auto random_text = [&] {
    ByteString b;
    for (std::size_t k = rng() % 6; k > 0; --k) {
      char32_t c;
      do c = cp(rng); while (!is_scalar_value(c));
      auto e = encode_code_point(c);
      b.insert(b.end(), e.begin(), e.end());
    }
    return b;
  };
  for (int trial = 0; trial < 5000; ++trial) {
    ByteString a = random_text(), b = random_text();
    ASSERT_TRUE(is_well_formed(a));
    ASSERT_TRUE(is_well_formed(concat(a, b)));
  }
}

TEST(Feed, LeadE0NarrowsNextRange) {
  auto r = feed(ValidatorState{}, 0xE0);
  EXPECT_TRUE(std::holds_alternative<NeedMore>(r.verdict));
  EXPECT_EQ(r.state.mode, ValidatorState::Mode::kNeedContinuation);
  EXPECT_EQ(r.state.next_range, (OctetRange{0xA0, 0xBF}));
  EXPECT_EQ(r.state.remaining, 2);
}

TEST(Feed, CompletesPendingUnit) {
  auto s = feed(feed(ValidatorState{}, 0xE0).state, 0xA4).state;
  EXPECT_EQ(s.pending_size, 2);
  EXPECT_EQ(s.next_range, kContinuation);
  auto r = feed(s, 0x85);
  ASSERT_TRUE(std::holds_alternative<CompletedUnit>(r.verdict));
  EXPECT_EQ(std::get<CompletedUnit>(r.verdict).unit.code_point(0), U'अ');
  EXPECT_TRUE(r.state.at_boundary());
}

TEST(Feed, RejectedPrefixRefeedsByte) {
  auto s = feed(ValidatorState{}, 0xE0).state;
  auto r = feed(s, 0x7F);
  ASSERT_TRUE(std::holds_alternative<IllFormed>(r.verdict));
  EXPECT_EQ(std::get<IllFormed>(r.verdict).rejected, (ByteString{0xE0}));
  ASSERT_TRUE(r.refeed.has_value());
  ASSERT_TRUE(std::holds_alternative<CompletedUnit>(*r.refeed));
  EXPECT_EQ(std::get<CompletedUnit>(*r.refeed).unit.code_point(0), U'\x7F');
  EXPECT_TRUE(r.state.at_boundary());
}

TEST(Feed, RejectionAgreesWithBruteForceOverTwoBytePrefixes) {
  // Feeding [a, b]: the prefix [a] is rejected exactly when a is a viable lead
  // but [a, b] is not a prefix of any row.
  RowMatcher rows;
  for (int a = 0; a < 256; ++a) {
    auto s = feed(ValidatorState{}, static_cast<std::uint8_t>(a)).state;
    for (int b = 0; b < 256; ++b) {
      ByteString ab{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)};
      bool expect_reject = rows.is_proper_prefix(ByteView(ab).first(1)) && !rows.is_proper_prefix(ab) &&
                           rows.unit_length(ab) != 2;
      auto r = feed(s, static_cast<std::uint8_t>(b));
      bool rejected = !s.at_boundary() && std::holds_alternative<IllFormed>(r.verdict);
      ASSERT_EQ(rejected, expect_reject) << a << ' ' << b;
    }
  }
}

TEST(Feed, ModeInvariantHolds) {
  std::mt19937_64 rng(3);
  ValidatorState s;
  for (int k = 0; k < 100000; ++k) {
    s = feed(s, testing::interesting_byte(rng)).state;
    bool boundary = s.at_boundary();
    ASSERT_EQ(boundary, s.pending_size == 0);
    ASSERT_EQ(boundary, s.remaining == 0);
    if (!boundary) {
      ASSERT_GE(s.next_range.lo, 0x80);
      ASSERT_LE(s.next_range.hi, 0xBF);
    }
  }
}

// Folding feed over the input yields the same units and subparts as decode.
TEST(Feed, StreamMatchesDecode) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20000; ++trial) {
    ByteString b;
    for (std::size_t k = rng() % 12; k > 0; --k) b.push_back(testing::interesting_byte(rng));
    std::u32string folded;
    ValidatorState s;
    auto take = [&](const FeedVerdict& v) {
      if (const auto* c = std::get_if<CompletedUnit>(&v)) folded.push_back(c->unit.code_point(0));
      if (std::holds_alternative<IllFormed>(v)) folded.push_back(kReplacementCharacter);
    };
    for (std::uint8_t x : b) {
      auto r = feed(s, x);
      take(r.verdict);
      if (r.refeed) take(*r.refeed);
      s = r.state;
    }
    if (finish(s)) folded.push_back(kReplacementCharacter);
    ASSERT_EQ(folded, decode(b, ReplaceSection{}).code_points()) << to_hex(b);
  }
}

TEST(Decode, Examples) {
  EXPECT_EQ(decode(ByteString{0xE0, 0xA4, 0x85}).code_points(), U"अ");
  EXPECT_EQ(decode(ByteString{0xE0, 0xA4}).code_points(), U"�");
  EXPECT_TRUE(decode(ByteString{}, FailEntirely{}).empty());
  EXPECT_TRUE(decode(ByteString{}, DropSection{}).empty());
  EXPECT_TRUE(decode(ByteString{}, ReplaceSection{}).empty());
  auto joy = decode(ByteString{0xF0, 0x9F, 0x98, 0x82});
  ASSERT_EQ(joy.size(), 1u);
  EXPECT_EQ(joy.code_point(0), U'\U0001F602');
  EXPECT_EQ(ByteString(joy.bytes().begin(), joy.bytes().end()), encode_code_point(0x1F602));
}

TEST(Decode, FailEntirelyReportsOffset) {
  ByteString b{0x41, 0x42, 0xE0, 0xA4, 0x43};
  try {
    decode(b, FailEntirely{});
    FAIL() << "expected Utf8Error";
  } catch (const Utf8Error& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(Decode, DropRemovesSubparts) {
  ByteString b{0x41, 0xE0, 0xA4, 0x42, 0xFF, 0x80, 0x43};
  EXPECT_EQ(decode(b, DropSection{}).str(), "ABC");
}

TEST(Decode, OneReplacementPerMaximalSubpart) {
  // E0 80: E0 is a viable lead, 80 is outside A0..BF, so two subparts.
  EXPECT_EQ(decode(ByteString{0xE0, 0x80}).code_points(), U"��");
  // F0 9F 98 41: one truncated unit then 'A'.
  EXPECT_EQ(decode(ByteString{0xF0, 0x9F, 0x98, 0x41}).code_points(), U"�A");
  // ED A0 80: surrogate range, each byte its own subpart.
  EXPECT_EQ(decode(ByteString{0xED, 0xA0, 0x80}).code_points(), U"���");
  EXPECT_EQ(decode(ByteString{0xC0, 0xAF}).code_points(), U"��");
}

TEST(Decode, CustomReplacement) {
  EXPECT_EQ(decode(ByteString{0x41, 0xFF}, ReplaceSection{U'?'}).str(), "A?");
  EXPECT_THROW(decode(ByteString{0xFF}, ReplaceSection{0xD800}), Error);
}

TEST(Decode, MatchesIndependentReference) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20000; ++trial) {
    ByteString b;
    for (std::size_t k = rng() % 10; k > 0; --k) b.push_back(testing::interesting_byte(rng));
    ASSERT_EQ(decode(b).code_points(), testing::reference_decode(b)) << to_hex(b);
  }
}

TEST(EncodeCodePoint, Examples) {
  EXPECT_EQ(encode_code_point(0x41), (ByteString{0x41}));
  EXPECT_EQ(encode_code_point(0x905), (ByteString{0xE0, 0xA4, 0x85}));
  EXPECT_EQ(encode_code_point(0x2200), (ByteString{0xE2, 0x88, 0x80}));
}

TEST(EncodeCodePoint, RejectsSurrogatesAndOutOfRange) {
  EXPECT_THROW(encode_code_point(0xD800), Error);
  EXPECT_THROW(encode_code_point(0xDFFF), Error);
  EXPECT_THROW(encode_code_point(0x110000), Error);
}

TEST(EncodeCodePoint, RoundTripsEveryRow) {
  // Boundaries of each length class plus a stride through the whole range.
  std::vector<char32_t> cps = {0x0, 0x7F, 0x80, 0x7FF, 0x800, 0xD7FF, 0xE000, 0xFFFF, 0x10000, 0x10FFFF};
  for (char32_t c = 0; c <= kMaxCodePoint; c += 97) cps.push_back(c);
  for (char32_t c : cps) {
    if (!is_scalar_value(c)) continue;
    auto b = encode_code_point(c);
    ASSERT_TRUE(is_well_formed(b));
    auto d = decode(b, FailEntirely{});
    ASSERT_EQ(d.size(), 1u);
    ASSERT_EQ(d.code_point(0), c);
  }
}

TEST(CodeUnitSeq, BoundariesAreContiguous) {
  auto s = CodeUnitSeq::from_string("aГ∀😂");
  ASSERT_EQ(s.size(), 4u);
  std::vector<std::uint32_t> starts(s.starts().begin(), s.starts().end());
  EXPECT_EQ(starts, (std::vector<std::uint32_t>{0, 1, 3, 6}));
  EXPECT_EQ(s.byte_size(), 10u);
  EXPECT_EQ(s.suffix(2).str(), "∀😂");
  EXPECT_THROW(CodeUnitSeq::from_bytes(ByteString{0xE2, 0x88}), Utf8Error);
}

}  // namespace
}  // namespace u8stream
