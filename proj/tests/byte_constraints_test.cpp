// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

#include "u8stream/byte_constraints.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "support/char_baseline.hpp"
#include "support/oracles.hpp"

namespace u8stream {
namespace {

using testing::kEmojiGrimace;
using testing::kEmojiJoy;
using testing::kEmojiSmirk;

Grammar emoji_grammar() { return Grammar::from_strings({kEmojiGrimace, kEmojiJoy, kEmojiSmirk}); }

Vocabulary forall_vocab() {
  Vocabulary v;
  v.add(1, {0xE2, 0x88});
  v.add(2, {0x80});
  v.add(3, {0x41});
  return v;
}

// Every emoji needs at least two tokens.
Vocabulary emoji_split_vocab() {
  Vocabulary v;
  v.add_special(0, "<eos>");
  v.add(1, {0x41});
  v.add(2, {0x20});
  v.add(3, {0xF0, 0x9F});
  v.add(4, {0x98, 0xAC});
  v.add(5, {0x98, 0x82});
  v.add(6, {0x98, 0x8F});
  v.add(7, {0xF0});
  v.add(8, {0x9F, 0x98});
  v.add(9, {0xAC});
  v.add(10, {0x82});
  v.add(11, {0x8F});
  v.add(12, {0xF0, 0x9F, 0x98});
  return v;
}

TEST(Grammar, Invariants) {
  EXPECT_THROW(Grammar(std::vector<CodeUnitSeq>{}), ConstraintError);
  EXPECT_THROW(Grammar::from_strings({""}), ConstraintError);
  EXPECT_THROW(parse_grammar("ok\n\xE2\x88\n"), FormatError);
  EXPECT_THROW(parse_grammar("\n\n"), FormatError);
  auto g = parse_grammar("\xF0\x9F\x98\xAC\n\n\xF0\x9F\x98\x82\n");
  EXPECT_EQ(g.alternatives().size(), 2u);
}

TEST(Compile, Shapes) {
  auto forall = ByteDfa::compile(Grammar::from_strings({"∀"}));
  EXPECT_EQ(forall.num_states(), 4u);
  StateId s = ByteDfa::kStart;
  for (std::uint8_t b : {0xE2, 0x88, 0x80}) {
    EXPECT_FALSE(forall.is_accepting(s));
    s = forall.next(s, b);
    ASSERT_NE(s, ByteDfa::kNoState);
  }
  EXPECT_TRUE(forall.is_accepting(s));

  EXPECT_EQ(ByteDfa::compile(Grammar::from_strings({"A"})).num_states(), 2u);

  auto emoji = ByteDfa::compile(emoji_grammar());
  // F0 9F 98 shared, then three leaves.
  EXPECT_EQ(emoji.num_states(), 7u);
  StateId branch = emoji.run(ByteDfa::kStart, ByteString{0xF0, 0x9F, 0x98});
  EXPECT_EQ(emoji.out_octets(branch), (std::vector<std::uint8_t>{0x82, 0x8F, 0xAC}));
}

TEST(Compile, AcceptsExactlyTheAlternatives) {
  auto g = Grammar::from_strings({"ab", "abc", "∀", "Г"});
  auto d = ByteDfa::compile(g);
  std::set<ByteString> alts;
  for (const auto& a : g.alternatives()) alts.insert(ByteString(a.bytes().begin(), a.bytes().end()));
  // Every byte string up to length 3 over the relevant octets.
  std::vector<std::uint8_t> alphabet{0x61, 0x62, 0x63, 0xE2, 0x88, 0x80, 0xD0, 0x93, 0xFF};
  std::function<void(ByteString)> walk = [&](ByteString b) {
    StateId s = d.run(ByteDfa::kStart, b);
    EXPECT_EQ(s != ByteDfa::kNoState && d.is_accepting(s), alts.contains(b)) << to_hex(b);
    if (b.size() == 3) return;
    for (auto x : alphabet) {
      auto c = b;
      c.push_back(x);
      walk(c);
    }
  };
  walk({});
}

TEST(TokenMask, ForAllSplit) {
  auto d = ByteDfa::compile(Grammar::from_strings({"∀"}));
  auto v = forall_vocab();
  EXPECT_EQ(token_mask(d, ByteDfa::kStart, v), (std::vector<TokenId>{1}));
  StateId mid = advance(d, ByteDfa::kStart, v.at(1));
  EXPECT_EQ(token_mask(d, mid, v), (std::vector<TokenId>{2}));
  StateId end = advance(d, mid, v.at(2));
  EXPECT_TRUE(d.is_accepting(end));
  EXPECT_TRUE(token_mask(d, end, v).empty());
}

TEST(TokenMask, RejectsDeadState) {
  auto d = ByteDfa::compile(Grammar::from_strings({"A"}));
  EXPECT_THROW(token_mask(d, 99, forall_vocab()), ConstraintError);
  EXPECT_THROW(token_mask(d, ByteDfa::kTerminal, forall_vocab()), ConstraintError);
}

TEST(Advance, EmojiBranchAndTerminal) {
  auto d = ByteDfa::compile(emoji_grammar());
  auto v = emoji_split_vocab();
  StateId branch = advance(d, ByteDfa::kStart, v.at(12));
  EXPECT_EQ(d.out_octets(branch).size(), 3u);
  EXPECT_THROW(advance(d, branch, v.at(1)), ConstraintError);
  EXPECT_THROW(advance(d, branch, v.at(0)), ConstraintError);
  StateId leaf = advance(d, branch, v.at(10));
  EXPECT_TRUE(d.is_accepting(leaf));
  EXPECT_EQ(token_mask(d, leaf, v), (std::vector<TokenId>{0}));
  EXPECT_EQ(advance(d, leaf, v.at(0)), ByteDfa::kTerminal);
}

// Enumerates token paths from the start up to `depth` tokens.
void enumerate_paths(const ByteDfa& d, const Vocabulary& v, std::size_t depth,
                     const std::function<void(const TokenSequence&, StateId)>& visit) {
  std::function<void(TokenSequence&, StateId)> rec = [&](TokenSequence& path, StateId s) {
    visit(path, s);
    if (path.size() == depth) return;
    for (TokenId id : token_mask(d, s, v)) {
      if (v.is_special(id)) continue;
      path.push_back(id);
      rec(path, advance(d, s, v.at(id)));
      path.pop_back();
    }
  };
  TokenSequence path;
  rec(path, ByteDfa::kStart);
}

TEST(Properties, SoundnessByEnumeration) {
  auto g = emoji_grammar();
  auto d = ByteDfa::compile(g);
  auto v = emoji_split_vocab();
  std::set<ByteString> alts;
  for (const auto& a : g.alternatives()) alts.insert(ByteString(a.bytes().begin(), a.bytes().end()));
  std::size_t accepted = 0;
  enumerate_paths(d, v, 6, [&](const TokenSequence& path, StateId s) {
    if (d.is_accepting(s)) {
      ++accepted;
      EXPECT_TRUE(alts.contains(detokenize(v, path)));
    }
  });
  EXPECT_GT(accepted, 0u);
}

TEST(Properties, CompletenessOverAllSegmentations) {
  auto g = emoji_grammar();
  auto d = ByteDfa::compile(g);
  auto v = emoji_split_vocab();
  for (const auto& alt : g.alternatives()) {
    ByteString bytes(alt.bytes().begin(), alt.bytes().end());
    // Every way to cut bytes into vocabulary tokens.
    std::function<void(std::size_t, StateId)> rec = [&](std::size_t p, StateId s) {
      if (p == bytes.size()) {
        EXPECT_TRUE(d.is_accepting(s));
        return;
      }
      for (std::size_t len = 1; p + len <= bytes.size(); ++len) {
        auto id = v.find(ByteView(bytes).subspan(p, len));
        if (!id) continue;
        auto mask = token_mask(d, s, v);
        ASSERT_TRUE(std::binary_search(mask.begin(), mask.end(), *id));
        rec(p + len, advance(d, s, v.at(*id)));
      }
    };
    rec(0, ByteDfa::kStart);
  }
}

TEST(Properties, MaskNonEmptyWhenSomeSuffixIsSpellable) {
  std::mt19937_64 rng(41);
  auto g = Grammar::from_strings({"∀x", "Гa", "😂", "ab"});
  auto d = ByteDfa::compile(g);
  for (int trial = 0; trial < 200; ++trial) {
    Vocabulary v;
    for (TokenId id = 0; id < 6; ++id) {
      const auto& alt = g.alternatives()[rng() % g.alternatives().size()];
      std::size_t from = rng() % alt.byte_size();
      std::size_t len = 1 + rng() % (alt.byte_size() - from);
      ByteString piece(alt.bytes().begin() + from, alt.bytes().begin() + from + len);
      if (!v.find(piece)) v.add(id, piece);
    }
    for (StateId s = 0; s < d.num_states(); ++s) {
      // Brute force: can any token sequence spell a path from s to acceptance?
      std::function<bool(StateId, int)> reachable = [&](StateId at, int budget) {
        if (d.is_accepting(at)) return true;
        if (budget == 0) return false;
        for (const auto& [id, t] : v.tokens()) {
          StateId next = d.run(at, t.bytes);
          if (next != ByteDfa::kNoState && reachable(next, budget - 1)) return true;
        }
        return false;
      };
      if (!d.is_accepting(s) && reachable(s, 6)) {
        ASSERT_FALSE(token_mask(d, s, v).empty());
      }
    }
  }
}

TEST(Properties, ByteMaskAdmitsWhatCharacterLevelRejects) {
  auto g = Grammar::from_strings({"∀"});
  auto v = forall_vocab();
  auto mask = token_mask(ByteDfa::compile(g), ByteDfa::kStart, v);
  ASSERT_EQ(mask, (std::vector<TokenId>{1}));
  EXPECT_THROW(decode(v.bytes(1), FailEntirely{}), Utf8Error);
  auto baseline = testing::run_character_baseline(ScriptedProposer({{1}, {2}}), g, v);
  EXPECT_TRUE(baseline.crashed);
}

TEST(RunConstrained, SplitEmojiCompletes) {
  auto d = ByteDfa::compile(emoji_grammar());
  auto v = emoji_split_vocab();
  ScriptedProposer p({{1, 3, 12}, {2, 5, 4}});
  auto run = run_constrained(p, d, v);
  EXPECT_EQ(run.output, to_bytes(kEmojiJoy));
  ASSERT_EQ(run.steps.size(), 2u);
  EXPECT_EQ(run.steps[0].chosen, 3u);
  EXPECT_EQ(run.steps[1].chosen, 5u);
}

TEST(RunConstrained, FallsBackToLowestAdmissible) {
  auto d = ByteDfa::compile(emoji_grammar());
  auto v = emoji_split_vocab();
  auto run = run_constrained(ScriptedProposer{}, d, v);
  // 3 = F0 9F, then 4 = 98 AC.
  EXPECT_EQ(run.output, to_bytes(kEmojiGrimace));
}

TEST(RunConstrained, SingleTokenEmoji) {
  auto d = ByteDfa::compile(emoji_grammar());
  Vocabulary v;
  v.add(1, to_bytes(kEmojiGrimace));
  v.add(2, to_bytes(kEmojiSmirk));
  auto run = run_constrained(ScriptedProposer(std::vector<std::vector<TokenId>>{{2}}), d, v);
  EXPECT_EQ(run.output, to_bytes(kEmojiSmirk));
  EXPECT_EQ(run.steps.size(), 1u);
}

TEST(RunConstrained, ChosenEndOfSequenceStopsAtPrefixAlternative) {
  auto d = ByteDfa::compile(Grammar::from_strings({"a", "ab"}));
  Vocabulary v;
  v.add_special(0, "<eos>");
  v.add(1, {0x61});
  v.add(2, {0x62});
  EXPECT_EQ(run_constrained(ScriptedProposer({{1}, {0, 2}}), d, v).output, to_bytes("a"));
  EXPECT_EQ(run_constrained(ScriptedProposer({{1}, {2, 0}}), d, v).output, to_bytes("ab"));
}

TEST(RunConstrained, UnsatisfiableAtStepZero) {
  auto d = ByteDfa::compile(Grammar::from_strings({"∀"}));
  Vocabulary v;
  v.add(1, {0x41});
  try {
    run_constrained(ScriptedProposer{}, d, v);
    FAIL();
  } catch (const ConstraintError& e) {
    EXPECT_EQ(e.step(), 0u);
    EXPECT_STREQ(e.what(), "unsatisfiable at step 0");
  }
}

TEST(ProposerScript, Parses) {
  auto p = parse_proposer_script("# header\n1 3 12\n\n2\t5\n");
  EXPECT_EQ(std::vector<TokenId>(p.ranking(0).begin(), p.ranking(0).end()), (std::vector<TokenId>{1, 3, 12}));
  EXPECT_TRUE(p.ranking(1).empty());
  EXPECT_EQ(p.ranking(2).size(), 2u);
  EXPECT_THROW(parse_proposer_script("1 x\n"), FormatError);
}

}  // namespace
}  // namespace u8stream
