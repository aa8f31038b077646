// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

// Vocabulary ingestion and auditing.
//
// Byte-level vocabularies are usually shipped as UTF-8 files in which every
// byte is replaced by a printable stand-in code point (the GPT-2 byte
// encoder). ByteCodepointMap rebuilds that table so surface strings can be
// turned back into the raw, possibly ill-formed, token bytes.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "u8stream/byte_string.hpp"
#include "u8stream/error.hpp"
#include "u8stream/token_model.hpp"
#include "u8stream/utf8.hpp"

namespace u8stream {

class ByteCodepointMap {
 public:
  // Octets 21..7E, A1..AC and AE..FF map to themselves; the other 68 octets
  // take consecutive code points from U+0100 in ascending octet order.
  static ByteCodepointMap build() {
    ByteCodepointMap m;
    auto keeps_identity = [](int b) {
      return (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
    };
    char32_t next = 0x100;
    for (int b = 0; b < 256; ++b) {
      m.forward_[b] = keeps_identity(b) ? static_cast<char32_t>(b) : next++;
    }
    m.inverse_.fill(-1);
    for (int b = 0; b < 256; ++b) m.inverse_[m.forward_[b]] = static_cast<std::int16_t>(b);
    return m;
  }

  char32_t forward(std::uint8_t b) const noexcept { return forward_[b]; }

  std::optional<std::uint8_t> inverse(char32_t cp) const noexcept {
    if (cp >= inverse_.size() || inverse_[cp] < 0) return std::nullopt;
    return static_cast<std::uint8_t>(inverse_[cp]);
  }

  const std::array<char32_t, 256>& table() const noexcept { return forward_; }

 private:
  std::array<char32_t, 256> forward_{};
  std::array<std::int16_t, 0x144> inverse_{};
};

inline const ByteCodepointMap& gpt2_byte_map() {
  static const ByteCodepointMap map = ByteCodepointMap::build();
  return map;
}

// Thrown when a surface string contains a code point outside the map's image.
class SurfaceError : public Error {
 public:
  SurfaceError(std::size_t index, char32_t cp)
      : Error("surface code point " + format_code_point(cp) + " at index " + std::to_string(index) +
              " is not in the byte map's image"),
        index_(index),
        cp_(cp) {}
  std::size_t index() const noexcept { return index_; }
  char32_t code_point() const noexcept { return cp_; }

 private:
  std::size_t index_;
  char32_t cp_;
};

inline ByteString decode_surface_form(const ByteCodepointMap& map, const CodeUnitSeq& surface) {
  ByteString out;
  out.reserve(surface.size());
  for (std::size_t k = 0; k < surface.size(); ++k) {
    char32_t cp = surface.code_point(k);
    auto b = map.inverse(cp);
    if (!b) throw SurfaceError(k, cp);
    out.push_back(*b);
  }
  return out;
}

inline CodeUnitSeq encode_surface_form(const ByteCodepointMap& map, ByteView bytes) {
  CodeUnitSeq out;
  for (std::uint8_t b : bytes) out.push_back(map.forward(b));
  return out;
}

// ---------------------------------------------------------------------------
// Loading

enum class VocabFormat { kGpt2SurfaceJson, kTokenizerJson, kRawBytesTsv };

namespace detail {

// "<0xEA>" -> EA
inline std::optional<std::uint8_t> parse_byte_fallback_piece(std::string_view s) {
  if (s.size() != 6 || s.substr(0, 3) != "<0x" || s[5] != '>') return std::nullopt;
  auto hi = hex_digit(s[3]);
  auto lo = hex_digit(s[4]);
  if (!hi || !lo) return std::nullopt;
  return static_cast<std::uint8_t>(*hi << 4 | *lo);
}

inline nlohmann::json parse_json(std::string_view content) {
  try {
    return nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(e.byte, std::string("malformed JSON: ") + e.what());
  }
}

inline TokenId json_id(const nlohmann::json& j, std::string_view what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0 ||
      j.get<std::int64_t>() > std::int64_t{UINT32_MAX}) {
    throw FormatError(0, "invalid token id for " + std::string(what));
  }
  return static_cast<TokenId>(j.get<std::int64_t>());
}

inline ByteString surface_to_bytes(std::string_view surface, TokenId id) {
  auto seq = CodeUnitSeq::try_from_bytes(to_bytes(surface));
  if (!seq) throw FormatError(0, "token " + std::to_string(id) + " surface is not UTF-8");
  try {
    return decode_surface_form(gpt2_byte_map(), *seq);
  } catch (const SurfaceError& e) {
    throw FormatError(0, "token " + std::to_string(id) + ": " + e.what());
  }
}

// True if `j` (or anything nested in it) is an object with "type": `type`.
inline bool mentions_type(const nlohmann::json& j, std::string_view type) {
  if (j.is_object()) {
    if (auto it = j.find("type"); it != j.end() && it->is_string() && it->get<std::string>() == type) {
      return true;
    }
    for (const auto& [k, child] : j.items()) {
      if (mentions_type(child, type)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& child : j) {
      if (mentions_type(child, type)) return true;
    }
  }
  return false;
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t p = 0; (p = s.find(from, p)) != std::string::npos; p += to.size()) {
    s.replace(p, from.size(), to);
  }
  return s;
}

inline Vocabulary parse_gpt2(std::string_view content) {
  auto j = parse_json(content);
  if (!j.is_object()) throw FormatError(0, "expected a JSON object of surface -> id");
  Vocabulary v;
  for (const auto& [surface, idj] : j.items()) {
    TokenId id = json_id(idj, surface);
    v.add(id, surface_to_bytes(surface, id));
  }
  return v;
}

inline Vocabulary parse_tokenizer_json(std::string_view content) {
  auto j = parse_json(content);
  if (!j.is_object() || !j.contains("model") || !j["model"].is_object()) {
    throw FormatError(0, "expected a tokenizer description with a \"model\" object");
  }
  const auto& model = j["model"];
  const nlohmann::json none;
  const auto& pre = j.contains("pre_tokenizer") ? j["pre_tokenizer"] : none;
  const auto& dec = j.contains("decoder") ? j["decoder"] : none;
  const bool byte_level = mentions_type(pre, "ByteLevel") || mentions_type(dec, "ByteLevel");
  const bool metaspace = !byte_level && (mentions_type(pre, "Metaspace") ||
                                         mentions_type(dec, "Metaspace") || mentions_type(dec, "Replace"));

  auto piece_bytes = [&](const std::string& piece, TokenId id) -> ByteString {
    if (byte_level) return surface_to_bytes(piece, id);
    if (auto b = parse_byte_fallback_piece(piece)) return {*b};
    return to_bytes(metaspace ? replace_all(piece, "▁", " ") : piece);
  };

  struct Entry {
    ByteString bytes;
    bool special = false;
    std::string name;
  };
  std::map<TokenId, Entry> entries;
  if (!model.contains("vocab")) throw FormatError(0, "model has no vocab");
  const auto& vocab = model["vocab"];
  if (vocab.is_object()) {
    for (const auto& [piece, idj] : vocab.items()) {
      TokenId id = json_id(idj, piece);
      if (entries.contains(id)) throw FormatError(0, "duplicate token id " + std::to_string(id));
      entries[id] = Entry{piece_bytes(piece, id), false, {}};
    }
  } else if (vocab.is_array()) {
    // Unigram: [[piece, score], ...], id is the index.
    for (std::size_t k = 0; k < vocab.size(); ++k) {
      const auto& row = vocab[k];
      if (!row.is_array() || row.empty() || !row[0].is_string()) {
        throw FormatError(0, "malformed vocab entry at index " + std::to_string(k));
      }
      auto id = static_cast<TokenId>(k);
      entries[id] = Entry{piece_bytes(row[0].get<std::string>(), id), false, {}};
    }
  } else {
    throw FormatError(0, "model vocab must be an object or an array");
  }
  // Added tokens override model entries with the same id.
  if (j.contains("added_tokens") && j["added_tokens"].is_array()) {
    for (const auto& t : j["added_tokens"]) {
      if (!t.is_object() || !t.contains("id") || !t.contains("content")) {
        throw FormatError(0, "malformed added_tokens entry");
      }
      TokenId id = json_id(t["id"], "added token");
      std::string content = t["content"].get<std::string>();
      bool special = t.value("special", false);
      if (special) {
        entries[id] = Entry{{}, true, content};
      } else {
        entries[id] = Entry{to_bytes(content), false, {}};
      }
    }
  }
  Vocabulary v;
  for (auto& [id, e] : entries) {
    if (e.special) {
      v.add_special(id, e.name);
    } else if (!e.bytes.empty()) {
      v.add(id, std::move(e.bytes));
    }
  }
  return v;
}

// Lines of "<id>\t<hex bytes>" or "<id>\t\t<special name>". '#' starts a comment line.
inline Vocabulary parse_tsv(std::string_view content) {
  Vocabulary v;
  std::size_t line_no = 0;
  std::size_t p = 0;
  while (p <= content.size()) {
    std::size_t eol = content.find('\n', p);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(p, eol - p);
    p = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    for (std::size_t f = 0;;) {
      std::size_t tab = line.find('\t', f);
      fields.push_back(line.substr(f, tab == std::string_view::npos ? std::string_view::npos : tab - f));
      if (tab == std::string_view::npos) break;
      f = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty()) {
      throw FormatError(line_no, "line " + std::to_string(line_no) + ": expected <id>\\t<hex>");
    }
    std::uint64_t id = 0;
    for (char c : fields[0]) {
      if (c < '0' || c > '9' || id > UINT32_MAX) {
        throw FormatError(line_no, "line " + std::to_string(line_no) + ": bad token id");
      }
      id = id * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (id > UINT32_MAX) throw FormatError(line_no, "line " + std::to_string(line_no) + ": bad token id");
    try {
      if (fields[1].empty()) {
        if (fields.size() != 3) {
          throw FormatError(line_no, "line " + std::to_string(line_no) + ": empty bytes need a special name");
        }
        v.add_special(static_cast<TokenId>(id), std::string(fields[2]));
        continue;
      }
      auto bytes = from_hex(fields[1]);
      if (!bytes) throw FormatError(line_no, "line " + std::to_string(line_no) + ": bad hex");
      v.add(static_cast<TokenId>(id), std::move(*bytes));
    } catch (const FormatError& e) {
      if (e.position() != 0) throw;
      throw FormatError(line_no, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return v;
}

}  // namespace detail

inline Vocabulary parse_vocabulary(std::string_view content, VocabFormat format) {
  switch (format) {
    case VocabFormat::kGpt2SurfaceJson:
      return detail::parse_gpt2(content);
    case VocabFormat::kTokenizerJson:
      return detail::parse_tokenizer_json(content);
    case VocabFormat::kRawBytesTsv:
      return detail::parse_tsv(content);
  }
  throw FormatError(0, "unknown vocabulary format");
}

// Picks a format from the file extension or, for JSON, from its top level.
inline VocabFormat sniff_vocab_format(std::string_view path, std::string_view content) {
  auto ends_with = [&](std::string_view ext) {
    return path.size() >= ext.size() && path.substr(path.size() - ext.size()) == ext;
  };
  if (ends_with(".tsv") || ends_with(".txt")) return VocabFormat::kRawBytesTsv;
  auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos || content[first] != '{') return VocabFormat::kRawBytesTsv;
  auto j = nlohmann::json::parse(content, nullptr, /*allow_exceptions=*/false);
  if (j.is_object() && j.contains("model")) return VocabFormat::kTokenizerJson;
  return VocabFormat::kGpt2SurfaceJson;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Vocabulary load_vocabulary(const std::string& path, std::optional<VocabFormat> format = std::nullopt) {
  std::string content = read_file(path);
  return parse_vocabulary(content, format ? *format : sniff_vocab_format(path, content));
}

// ---------------------------------------------------------------------------
// Classification

enum class TokenClass { kWellFormed, kIllFormedExtendable, kIllFormedNever };
enum class VocabStyle { kByteLevel, kByteFallback, kWellFormedOnly };

inline const char* to_string(TokenClass c) {
  switch (c) {
    case TokenClass::kWellFormed: return "well-formed";
    case TokenClass::kIllFormedExtendable: return "ill-formed-extendable";
    case TokenClass::kIllFormedNever: return "ill-formed-never";
  }
  return "?";
}

inline const char* to_string(VocabStyle s) {
  switch (s) {
    case VocabStyle::kByteLevel: return "byte-level";
    case VocabStyle::kByteFallback: return "byte-fallback";
    case VocabStyle::kWellFormedOnly: return "well-formed-only";
  }
  return "?";
}

namespace detail {

// Validator position abstracted from the bytes already seen.
struct UnitPosition {
  OctetRange next;
  int remaining = 0;  // 0 = boundary
};

// Every position a well-formed stream can be in before an arbitrary byte.
inline std::vector<UnitPosition> all_unit_positions() {
  std::vector<UnitPosition> out{{{}, 0}};
  for (const auto& row : kWellFormedRows) {
    for (int seen = 1; seen < row.length; ++seen) {
      UnitPosition pos{row.tail[static_cast<std::size_t>(seen - 1)], row.length - seen};
      bool dup = std::any_of(out.begin(), out.end(), [&](const UnitPosition& q) {
        return q.remaining == pos.remaining && q.next == pos.next;
      });
      if (!dup) out.push_back(pos);
    }
  }
  return out;
}

inline bool runs_clean_from(UnitPosition pos, ByteView bytes) {
  for (std::uint8_t b : bytes) {
    if (pos.remaining == 0) {
      auto r = lead_row(b);
      if (!r) return false;
      const Utf8Row& row = kWellFormedRows[*r];
      pos = row.length == 1 ? UnitPosition{} : UnitPosition{row.tail[0], row.length - 1};
    } else {
      if (!pos.next.contains(b)) return false;
      --pos.remaining;
      pos.next = kContinuation;
    }
  }
  return true;
}

}  // namespace detail

// Extendable: some left and right context makes the bytes well-formed.
inline TokenClass classify_token(ByteView bytes) {
  if (is_well_formed(bytes)) return TokenClass::kWellFormed;
  if (std::any_of(bytes.begin(), bytes.end(), is_never_valid_octet)) return TokenClass::kIllFormedNever;
  static const std::vector<detail::UnitPosition> starts = detail::all_unit_positions();
  for (const auto& s : starts) {
    if (detail::runs_clean_from(s, bytes)) return TokenClass::kIllFormedExtendable;
  }
  return TokenClass::kIllFormedNever;
}

// Single-token sequence of the lowest-id ill-formed token, or nullopt iff
// every non-special token is well-formed.
inline std::optional<TokenSequence> find_ill_formed_witness(const Vocabulary& v) {
  for (const auto& [id, t] : v.tokens()) {
    if (!t.special && !is_well_formed(t.bytes)) return TokenSequence{id};
  }
  return std::nullopt;
}

struct TokenFinding {
  TokenId id = 0;
  ByteString bytes;
  TokenClass token_class = TokenClass::kWellFormed;
};

struct VocabReport {
  std::size_t total = 0;  // non-special tokens
  std::size_t special = 0;
  std::size_t well_formed = 0;
  std::size_t ill_formed_extendable = 0;
  std::size_t ill_formed_never = 0;
  // Distinct octets that have their own single-byte token.
  std::size_t single_byte_octets = 0;
  VocabStyle style = VocabStyle::kWellFormedOnly;
  std::optional<TokenSequence> witness;
  std::vector<TokenFinding> ill_formed_sample;
};

// Octets that can occur in well-formed UTF-8; 243 of them.
inline constexpr std::size_t kUsableOctets = 256 - 13;

inline VocabReport classify_vocabulary(const Vocabulary& v, std::size_t sample_limit = 16) {
  VocabReport r;
  std::array<bool, 256> single{};
  bool multi_byte_ill_formed = false;
  bool single_byte_ill_formed = false;
  for (const auto& [id, t] : v.tokens()) {
    if (t.special) {
      ++r.special;
      continue;
    }
    ++r.total;
    TokenClass c = classify_token(t.bytes);
    switch (c) {
      case TokenClass::kWellFormed: ++r.well_formed; break;
      case TokenClass::kIllFormedExtendable: ++r.ill_formed_extendable; break;
      case TokenClass::kIllFormedNever: ++r.ill_formed_never; break;
    }
    if (t.bytes.size() == 1) single[t.bytes[0]] = true;
    if (c != TokenClass::kWellFormed) {
      (t.bytes.size() == 1 ? single_byte_ill_formed : multi_byte_ill_formed) = true;
      if (r.ill_formed_sample.size() < sample_limit) r.ill_formed_sample.push_back({id, t.bytes, c});
    }
  }
  std::size_t usable_covered = 0;
  for (int b = 0; b < 256; ++b) {
    r.single_byte_octets += single[b];
    usable_covered += single[b] && !is_never_valid_octet(static_cast<std::uint8_t>(b));
  }
  const bool fallback_block = usable_covered == kUsableOctets;
  if (multi_byte_ill_formed) {
    r.style = VocabStyle::kByteLevel;
  } else if (fallback_block) {
    r.style = VocabStyle::kByteFallback;
  } else if (single_byte_ill_formed) {
    // Stray ill-formed byte tokens without a complete fallback block.
    r.style = VocabStyle::kByteLevel;
  } else {
    r.style = VocabStyle::kWellFormedOnly;
  }
  r.witness = find_ill_formed_witness(v);
  return r;
}

}  // namespace u8stream
