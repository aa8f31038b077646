// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

// Byte-level constrained generation over a literal-alternation grammar.
//
// The automaton's alphabet is octets, not characters, so a token holding only
// part of a multi-byte character is admissible whenever its bytes continue
// some alternative. A character-level matcher would have to decode such a
// token first and cannot.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "u8stream/byte_string.hpp"
#include "u8stream/error.hpp"
#include "u8stream/token_model.hpp"
#include "u8stream/utf8.hpp"

namespace u8stream {

// Non-empty list of non-empty, well-formed literal alternatives.
class Grammar {
 public:
  explicit Grammar(std::vector<CodeUnitSeq> alternatives) : alternatives_(std::move(alternatives)) {
    if (alternatives_.empty()) throw ConstraintError(0, "grammar has no alternatives");
    for (const auto& a : alternatives_) {
      if (a.empty()) throw ConstraintError(0, "grammar alternative is empty");
    }
  }

  static Grammar from_strings(const std::vector<std::string>& alts) {
    std::vector<CodeUnitSeq> seqs;
    for (const auto& s : alts) seqs.push_back(CodeUnitSeq::from_string(s));
    return Grammar(std::move(seqs));
  }

  const std::vector<CodeUnitSeq>& alternatives() const noexcept { return alternatives_; }

 private:
  std::vector<CodeUnitSeq> alternatives_;
};

// One alternative per line. Blank lines are skipped; a trailing "\r" is kept
// as part of the alternative. Ill-formed lines are rejected.
inline Grammar parse_grammar(std::string_view content) {
  std::vector<CodeUnitSeq> alts;
  std::size_t line_no = 0;
  std::size_t p = 0;
  while (p < content.size()) {
    std::size_t eol = content.find('\n', p);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(p, eol - p);
    p = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    auto seq = CodeUnitSeq::try_from_bytes(to_bytes(line));
    if (!seq) throw FormatError(line_no, "grammar line " + std::to_string(line_no) + " is not well-formed UTF-8");
    alts.push_back(std::move(*seq));
  }
  if (alts.empty()) throw FormatError(0, "grammar has no alternatives");
  return Grammar(std::move(alts));
}

using StateId = std::uint32_t;

// Trie over the alternatives' bytes. Every state lies on a path to an
// accepting state, so all states are live.
class ByteDfa {
 public:
  static constexpr StateId kNoState = std::numeric_limits<StateId>::max();
  // Reached by an end-of-sequence token from an accepting state.
  static constexpr StateId kTerminal = kNoState - 1;
  static constexpr StateId kStart = 0;

  static ByteDfa compile(const Grammar& g) {
    ByteDfa d;
    d.add_state();
    for (const auto& alt : g.alternatives()) {
      StateId s = kStart;
      for (std::uint8_t b : alt.bytes()) {
        StateId t = d.transitions_[s][b];
        if (t == kNoState) {
          t = d.add_state();
          d.transitions_[s][b] = t;
        }
        s = t;
      }
      d.accepting_[s] = true;
    }
    return d;
  }

  std::size_t num_states() const noexcept { return transitions_.size(); }
  bool valid(StateId s) const noexcept { return s < num_states(); }
  bool is_accepting(StateId s) const noexcept { return valid(s) && accepting_[s]; }
  bool is_live(StateId s) const noexcept { return valid(s); }

  StateId next(StateId s, std::uint8_t b) const noexcept {
    return valid(s) ? transitions_[s][b] : kNoState;
  }

  // State after all of `bytes`, or kNoState if the run leaves the automaton.
  StateId run(StateId s, ByteView bytes) const noexcept {
    for (std::uint8_t b : bytes) {
      s = next(s, b);
      if (s == kNoState) return kNoState;
    }
    return s;
  }

  // Outgoing octets of s, ascending.
  std::vector<std::uint8_t> out_octets(StateId s) const {
    std::vector<std::uint8_t> out;
    if (!valid(s)) return out;
    for (int b = 0; b < 256; ++b) {
      if (transitions_[s][b] != kNoState) out.push_back(static_cast<std::uint8_t>(b));
    }
    return out;
  }

 private:
  StateId add_state() {
    std::array<StateId, 256> row;
    row.fill(kNoState);
    transitions_.push_back(row);
    accepting_.push_back(false);
    return static_cast<StateId>(transitions_.size() - 1);
  }

  std::vector<std::array<StateId, 256>> transitions_;
  std::vector<bool> accepting_;
};

// Ids admissible from live state s: non-special tokens whose bytes run within
// the automaton, plus special tokens when s is accepting. Ascending order.
inline std::vector<TokenId> token_mask(const ByteDfa& d, StateId s, const Vocabulary& v) {
  if (!d.is_live(s)) throw ConstraintError(0, "token mask requested for a dead or unknown state");
  std::vector<TokenId> out;
  for (const auto& [id, t] : v.tokens()) {
    if (t.special ? d.is_accepting(s) : d.run(s, t.bytes) != ByteDfa::kNoState) out.push_back(id);
  }
  return out;
}

// Masks for every state, indexed by state.
inline std::vector<std::vector<TokenId>> compute_masks(const ByteDfa& d, const Vocabulary& v) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(d.num_states());
  for (StateId s = 0; s < d.num_states(); ++s) out.push_back(token_mask(d, s, v));
  return out;
}

// Throws ConstraintError if the token is masked out at s.
inline StateId advance(const ByteDfa& d, StateId s, const Token& t) {
  if (!d.is_live(s)) throw ConstraintError(0, "advance from a dead or unknown state");
  if (t.special) {
    if (!d.is_accepting(s)) {
      throw ConstraintError(0, "special token " + std::to_string(t.id) + " before an accepting state");
    }
    return ByteDfa::kTerminal;
  }
  StateId next = d.run(s, t.bytes);
  if (next == ByteDfa::kNoState) {
    throw ConstraintError(0, "token " + std::to_string(t.id) + " (" + to_hex(t.bytes) +
                                 ") is masked out at state " + std::to_string(s));
  }
  return next;
}

// Scripted proposer: a ranked list of candidate ids per step. When no ranked
// candidate is admissible, or the script has run out, it falls back to the
// lowest admissible id.
class ScriptedProposer {
 public:
  ScriptedProposer() = default;
  explicit ScriptedProposer(std::vector<std::vector<TokenId>> rankings) : rankings_(std::move(rankings)) {}

  std::span<const TokenId> ranking(std::size_t step) const noexcept {
    if (step >= rankings_.size()) return {};
    return rankings_[step];
  }

 private:
  std::vector<std::vector<TokenId>> rankings_;
};

// Lines of whitespace-separated ids, one line per step.
inline ScriptedProposer parse_proposer_script(std::string_view content) {
  std::vector<std::vector<TokenId>> rankings;
  std::size_t line_no = 0;
  std::size_t p = 0;
  while (p < content.size()) {
    std::size_t eol = content.find('\n', p);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(p, eol - p);
    p = eol + 1;
    ++line_no;
    if (!line.empty() && line.front() == '#') continue;
    std::vector<TokenId> ids;
    std::uint64_t cur = 0;
    bool in_num = false;
    for (std::size_t k = 0; k <= line.size(); ++k) {
      char c = k < line.size() ? line[k] : ' ';
      if (c >= '0' && c <= '9') {
        cur = cur * 10 + static_cast<std::uint64_t>(c - '0');
        if (cur > UINT32_MAX) throw FormatError(line_no, "script line " + std::to_string(line_no) + ": id out of range");
        in_num = true;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        if (in_num) ids.push_back(static_cast<TokenId>(cur));
        cur = 0;
        in_num = false;
      } else {
        throw FormatError(line_no, "script line " + std::to_string(line_no) + ": unexpected character");
      }
    }
    rankings.push_back(std::move(ids));
  }
  return ScriptedProposer(std::move(rankings));
}

struct ConstrainedStep {
  StateId state = 0;
  std::size_t mask_size = 0;
  TokenId chosen = 0;
};

struct ConstrainedRun {
  ByteString output;
  std::vector<ConstrainedStep> steps;
  StateId final_state = ByteDfa::kStart;
};

// Generates until an accepting state is reached and either a special token is
// chosen or no further byte-carrying token is admissible.
inline ConstrainedRun run_constrained(const ScriptedProposer& proposer, const ByteDfa& d, const Vocabulary& v) {
  ConstrainedRun run;
  StateId s = ByteDfa::kStart;
  for (std::size_t step = 0;; ++step) {
    std::vector<TokenId> mask = token_mask(d, s, v);
    bool has_continuation = false;
    for (TokenId id : mask) has_continuation |= !v.is_special(id);
    if (d.is_accepting(s) && !has_continuation) break;
    if (mask.empty()) throw ConstraintError(step, "unsatisfiable at step " + std::to_string(step));

    std::optional<TokenId> choice;
    for (TokenId id : proposer.ranking(step)) {
      if (std::binary_search(mask.begin(), mask.end(), id)) {
        choice = id;
        break;
      }
    }
    if (!choice) {
      // Accepting states end the run rather than take an unranked continuation.
      if (d.is_accepting(s)) break;
      for (TokenId id : mask) {
        if (!v.is_special(id)) {
          choice = id;
          break;
        }
      }
    }
    run.steps.push_back({s, mask.size(), *choice});
    const Token& t = v.at(*choice);
    StateId next = advance(d, s, t);
    if (next == ByteDfa::kTerminal) break;
    run.output.insert(run.output.end(), t.bytes.begin(), t.bytes.end());
    s = next;
  }
  run.final_state = s;
  return run;
}

}  // namespace u8stream
