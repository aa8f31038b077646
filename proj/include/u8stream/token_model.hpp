// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

// Tokens, vocabularies, detokenization and a deterministic greedy tokenizer.
//
// Detokenization is plain concatenation of token bytes and is therefore a
// homomorphism over token sequences. Tokenization is not: cutting `a` and `b`
// separately need not agree with cutting `a . b`. non_homomorphism_witness()
// searches a vocabulary for a concrete counterexample.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "u8stream/byte_string.hpp"
#include "u8stream/error.hpp"

namespace u8stream {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

struct Token {
  TokenId id = 0;
  ByteString bytes;
  bool special = false;
  // Display name for special tokens such as "</s>"; empty otherwise.
  std::string name;
};

// A finite id -> bytes map. Special tokens carry no bytes.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Throws FormatError on a duplicate id, or on empty bytes for a non-special token.
  void add(TokenId id, ByteString bytes) {
    if (bytes.empty()) {
      throw FormatError(0, "token " + std::to_string(id) + " has no bytes and is not special");
    }
    insert(Token{id, std::move(bytes), false, {}});
  }

  void add_special(TokenId id, std::string name = {}) {
    insert(Token{id, {}, true, std::move(name)});
  }

  bool contains(TokenId id) const { return tokens_.contains(id); }
  bool is_special(TokenId id) const {
    auto it = tokens_.find(id);
    return it != tokens_.end() && it->second.special;
  }

  const Token& at(TokenId id) const {
    auto it = tokens_.find(id);
    if (it == tokens_.end()) throw UnknownTokenError(id, 0);
    return it->second;
  }
  const ByteString& bytes(TokenId id) const { return at(id).bytes; }

  // Lowest id whose bytes equal `b`, if any.
  std::optional<TokenId> find(ByteView b) const {
    auto it = by_bytes_.find(ByteString(b.begin(), b.end()));
    if (it == by_bytes_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t max_token_bytes() const noexcept { return max_bytes_; }

  // Ordered by id.
  const std::map<TokenId, Token>& tokens() const noexcept { return tokens_; }

  std::vector<TokenId> special_ids() const {
    std::vector<TokenId> out;
    for (const auto& [id, t] : tokens_) {
      if (t.special) out.push_back(id);
    }
    return out;
  }

 private:
  void insert(Token t) {
    TokenId id = t.id;
    if (tokens_.contains(id)) {
      throw FormatError(0, "duplicate token id " + std::to_string(id));
    }
    if (!t.special) {
      max_bytes_ = std::max(max_bytes_, t.bytes.size());
      auto [it, inserted] = by_bytes_.emplace(t.bytes, id);
      if (!inserted && id < it->second) it->second = id;
    }
    tokens_.emplace(id, std::move(t));
  }

  std::map<TokenId, Token> tokens_;
  std::unordered_map<ByteString, TokenId, ByteStringHash> by_bytes_;
  std::size_t max_bytes_ = 0;
};

// Concatenates token bytes in order, skipping special tokens. Throws
// UnknownTokenError naming the id and its position.
inline ByteString detokenize(const Vocabulary& v, std::span<const TokenId> t) {
  ByteString out;
  for (std::size_t k = 0; k < t.size(); ++k) {
    auto it = v.tokens().find(t[k]);
    if (it == v.tokens().end()) throw UnknownTokenError(t[k], k);
    if (it->second.special) continue;
    out.insert(out.end(), it->second.bytes.begin(), it->second.bytes.end());
  }
  return out;
}

// Out-of-vocabulary handling for tokenize_greedy().
struct OovFail {};
struct OovDrop {};
struct OovByteFallback {
  std::array<TokenId, 256> byte_token_ids{};

  // Finds a single-byte token for every octet. Throws FormatError if one is missing.
  static OovByteFallback from_vocabulary(const Vocabulary& v) {
    OovByteFallback f;
    for (int b = 0; b < 256; ++b) {
      auto octet = static_cast<std::uint8_t>(b);
      auto id = v.find(ByteView(&octet, 1));
      if (!id) {
        throw FormatError(0, "vocabulary has no single-byte token for " + to_hex(ByteView(&octet, 1)));
      }
      f.byte_token_ids[b] = *id;
    }
    return f;
  }
};
using OovStrategy = std::variant<OovFail, OovDrop, OovByteFallback>;

// Longest match from the left. Uncoverable bytes are handled by `strategy`:
// OovFail throws TokenizeError at the first uncoverable offset, OovDrop skips
// them, OovByteFallback emits their single-byte tokens.
inline TokenSequence tokenize_greedy(const Vocabulary& v, ByteView b,
                                     const OovStrategy& strategy = OovFail{}) {
  if (const auto* f = std::get_if<OovByteFallback>(&strategy)) {
    for (int o = 0; o < 256; ++o) {
      TokenId id = f->byte_token_ids[o];
      if (!v.contains(id) || v.bytes(id) != ByteString{static_cast<std::uint8_t>(o)}) {
        throw FormatError(0, "byte fallback table entry " + std::to_string(o) +
                                 " is not a matching single-byte token");
      }
    }
  }
  TokenSequence out;
  std::size_t p = 0;
  const std::size_t longest = v.max_token_bytes();
  while (p < b.size()) {
    std::optional<TokenId> match;
    std::size_t len = std::min(longest, b.size() - p);
    for (; len > 0; --len) {
      match = v.find(b.subspan(p, len));
      if (match) break;
    }
    if (match) {
      out.push_back(*match);
      p += len;
      continue;
    }
    if (std::holds_alternative<OovFail>(strategy)) throw TokenizeError(p);
    if (const auto* f = std::get_if<OovByteFallback>(&strategy)) {
      out.push_back(f->byte_token_ids[b[p]]);
    }
    ++p;
  }
  return out;
}

struct SplitWitness {
  ByteString left;
  ByteString right;

  friend bool operator==(const SplitWitness&, const SplitWitness&) = default;
};

// Searches every interior split of every multi-byte token (in id order) for a
// pair with tokenize(left . right) != tokenize(left) . tokenize(right). Splits
// whose halves are not coverable under OovFail are skipped.
inline std::optional<SplitWitness> non_homomorphism_witness(const Vocabulary& v) {
  for (const auto& [id, token] : v.tokens()) {
    if (token.special || token.bytes.size() < 2) continue;
    ByteView whole = token.bytes;
    for (std::size_t k = 1; k < whole.size(); ++k) {
      ByteView left = whole.first(k);
      ByteView right = whole.subspan(k);
      TokenSequence separate;
      try {
        separate = tokenize_greedy(v, left);
        auto tail = tokenize_greedy(v, right);
        separate.insert(separate.end(), tail.begin(), tail.end());
      } catch (const TokenizeError&) {
        continue;
      }
      if (tokenize_greedy(v, whole) != separate) {
        return SplitWitness{ByteString(left.begin(), left.end()), ByteString(right.begin(), right.end())};
      }
    }
  }
  return std::nullopt;
}

}  // namespace u8stream
