// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

// Incremental detokenization of a growing token stream.
//
// Two offsets are kept over the token sequence: `i` (prefix offset) and `j`
// (read offset), the last two token positions where a token boundary coincided
// with a code unit boundary. On each new token, bytes of tokens[i:j] and
// tokens[i:] are decoded with replacement; if the latter is longer and does not
// end in the replacement character, the new code units are emitted and the
// offsets advance to (j, end). Text emitted once is never revised.
//
// Reference mode reproduces that rule exactly, including two known artifacts:
// a stream ending in bytes that can never become well-formed stalls forever,
// and a genuine U+FFFD produced by the model is held back as if it were a
// partial character.
//
// Robust mode asks the validator instead: output is held back only while the
// trailing bytes are an incomplete but still extendable unit prefix. Ill-formed
// bytes are flushed as replacement characters immediately, and finish()
// flushes a dangling prefix at end of stream.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "u8stream/byte_string.hpp"
#include "u8stream/token_model.hpp"
#include "u8stream/utf8.hpp"

namespace u8stream {

enum class DecodeMode { kReference, kRobust };

struct StreamState {
  std::size_t i = 0;
  std::size_t j = 0;
  TokenSequence beta;
  CodeUnitSeq v;
};

struct EmitEvent {
  CodeUnitSeq new_text;
  std::size_t i_after = 0;
  std::size_t j_after = 0;
  // Unset for the end-of-stream flush.
  std::optional<TokenId> token_consumed;
};

namespace detail {

inline CodeUnitSeq decode_tokens(const Vocabulary& v, std::span<const TokenId> t) {
  return decode(detokenize(v, t), ReplaceSection{});
}

inline EmitEvent commit(StreamState& state, const CodeUnitSeq& prev, const CodeUnitSeq& cand,
                        std::optional<TokenId> consumed) {
  EmitEvent ev;
  ev.new_text = cand.suffix(prev.size());
  state.i = state.j;
  state.j = state.beta.size();
  state.v.append(ev.new_text);
  ev.i_after = state.i;
  ev.j_after = state.j;
  ev.token_consumed = consumed;
  return ev;
}

inline EmitEvent hold(const StreamState& state, std::optional<TokenId> consumed) {
  return EmitEvent{{}, state.i, state.j, consumed};
}

inline void append_checked(StreamState& state, const Vocabulary& v, TokenId next) {
  if (!v.contains(next)) throw UnknownTokenError(next, state.beta.size());
  state.beta.push_back(next);
}

}  // namespace detail

inline EmitEvent advance_token(StreamState& state, const Vocabulary& v, TokenId next) {
  detail::append_checked(state, v, next);
  std::span<const TokenId> beta = state.beta;
  CodeUnitSeq prev = detail::decode_tokens(v, beta.subspan(state.i, state.j - state.i));
  CodeUnitSeq cand = detail::decode_tokens(v, beta.subspan(state.i));
  if (cand.size() > prev.size() && cand.back() != kReplacementCharacter) {
    return detail::commit(state, prev, cand, next);
  }
  return detail::hold(state, next);
}

// True when `bytes` ends inside an incomplete but still extendable unit.
inline bool ends_mid_unit(ByteView bytes) {
  ValidatorState st;
  for (std::uint8_t b : bytes) {
    if (detail::advance(st, b) == detail::Step::kBrokenPrefix) detail::advance(st, b);
  }
  return !st.at_boundary();
}

inline EmitEvent advance_token_robust(StreamState& state, const Vocabulary& v, TokenId next) {
  detail::append_checked(state, v, next);
  std::span<const TokenId> beta = state.beta;
  ByteString tail = detokenize(v, beta.subspan(state.i));
  CodeUnitSeq prev = detail::decode_tokens(v, beta.subspan(state.i, state.j - state.i));
  CodeUnitSeq cand = decode(tail, ReplaceSection{});
  if (cand.size() > prev.size() && !ends_mid_unit(tail)) {
    return detail::commit(state, prev, cand, next);
  }
  return detail::hold(state, next);
}

// Robust-mode end of stream: emits whatever is held back, with a dangling
// unit prefix replaced. Returns nullopt when nothing is pending.
inline std::optional<EmitEvent> finish_robust(StreamState& state, const Vocabulary& v) {
  if (state.j == state.beta.size()) return std::nullopt;
  std::span<const TokenId> beta = state.beta;
  CodeUnitSeq prev = detail::decode_tokens(v, beta.subspan(state.i, state.j - state.i));
  CodeUnitSeq cand = detail::decode_tokens(v, beta.subspan(state.i));
  if (cand.size() <= prev.size()) return std::nullopt;
  return detail::commit(state, prev, cand, std::nullopt);
}

inline EmitEvent advance(StreamState& state, const Vocabulary& v, TokenId next, DecodeMode mode) {
  return mode == DecodeMode::kReference ? advance_token(state, v, next)
                                        : advance_token_robust(state, v, next);
}

// Stand-in for a language model: replays a fixed script of token ids.
class MockLm {
 public:
  MockLm() = default;
  explicit MockLm(TokenSequence script) : script_(std::move(script)) {}

  std::optional<TokenId> next() {
    if (cursor_ >= script_.size()) return std::nullopt;
    return script_[cursor_++];
  }
  bool exhausted() const noexcept { return cursor_ >= script_.size(); }
  std::size_t cursor() const noexcept { return cursor_; }
  const TokenSequence& script() const noexcept { return script_; }

 private:
  TokenSequence script_;
  std::size_t cursor_ = 0;
};

struct GenerateResult {
  std::vector<EmitEvent> events;
  StreamState state;
};

// Drives the decoder over the whole script. Special tokens are not fed. In
// robust mode a final flush event is appended if anything was held back.
inline GenerateResult generate(MockLm& lm, const Vocabulary& v, DecodeMode mode) {
  GenerateResult r;
  while (auto next = lm.next()) {
    if (v.contains(*next) && v.is_special(*next)) continue;
    r.events.push_back(advance(r.state, v, *next, mode));
  }
  if (mode == DecodeMode::kRobust) {
    if (auto ev = finish_robust(r.state, v)) r.events.push_back(std::move(*ev));
  }
  return r;
}

inline CodeUnitSeq concat_text(std::span<const EmitEvent> events) {
  CodeUnitSeq out;
  for (const auto& e : events) out.append(e.new_text);
  return out;
}

}  // namespace u8stream
