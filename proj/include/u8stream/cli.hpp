// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

// Command implementations behind the u8stream tool. Each command takes its
// streams explicitly so it can run in-process under test.
//
// Exit codes: 0 success / well-formed, 1 domain failure (ill-formed input,
// unsatisfiable constraint), 2 usage or parse error.
//
// Standard output carries only payload. Reports on ill-formed bytes render
// them as uppercase hex, never raw, so everything the tool prints is
// well-formed UTF-8.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "u8stream/byte_constraints.hpp"
#include "u8stream/error.hpp"
#include "u8stream/incremental_decoder.hpp"
#include "u8stream/token_model.hpp"
#include "u8stream/utf8.hpp"
#include "u8stream/vocab_analysis.hpp"

namespace u8stream::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline void write_bytes(std::ostream& out, ByteView b) {
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline std::string describe(const IllFormedSubpart& s) {
  std::string what;
  if (s.truncated_length != 0) {
    what = "truncated " + std::to_string(s.truncated_length) + "-byte unit";
  } else if (is_continuation_octet(s.bytes.front())) {
    what = "unexpected continuation byte";
  } else {
    what = "invalid byte";
  }
  return "offset " + std::to_string(s.offset) + ": " + to_hex(s.bytes) + " (" + what + ")";
}

// ---------------------------------------------------------------------------
// validate

enum class Strategy { kFail, kDrop, kReplace };

inline int cmd_validate(std::istream& in, std::ostream& out, std::ostream& err,
                        Strategy strategy = Strategy::kReplace) {
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteString bytes = to_bytes(raw);
  auto subparts = ill_formed_subparts(bytes);
  for (const auto& s : subparts) err << describe(s) << '\n';
  switch (strategy) {
    case Strategy::kFail:
      if (subparts.empty()) write_bytes(out, bytes);
      break;
    case Strategy::kDrop:
      write_bytes(out, decode(bytes, DropSection{}).bytes());
      break;
    case Strategy::kReplace:
      write_bytes(out, decode(bytes, ReplaceSection{}).bytes());
      break;
  }
  return subparts.empty() ? kExitOk : kExitDomain;
}

// ---------------------------------------------------------------------------
// audit

inline nlohmann::ordered_json report_to_json(const VocabReport& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["special"] = r.special;
  j["classes"] = {{"well_formed", r.well_formed},
                  {"ill_formed_extendable", r.ill_formed_extendable},
                  {"ill_formed_never", r.ill_formed_never}};
  j["single_byte_octets"] = r.single_byte_octets;
  j["style"] = to_string(r.style);
  j["witness"] = nullptr;
  if (r.witness) {
    j["witness"] = nlohmann::ordered_json::array();
    for (TokenId id : *r.witness) j["witness"].push_back(id);
  }
  j["ill_formed_sample"] = nlohmann::ordered_json::array();
  for (const auto& f : r.ill_formed_sample) {
    j["ill_formed_sample"].push_back({{"id", f.id}, {"bytes", to_hex(f.bytes)}, {"class", to_string(f.token_class)}});
  }
  return j;
}

inline void print_report_text(const VocabReport& r, const Vocabulary& v, std::ostream& out) {
  out << "tokens:                  " << r.total << " (+" << r.special << " special)\n"
      << "well-formed:             " << r.well_formed << '\n'
      << "ill-formed, extendable:  " << r.ill_formed_extendable << '\n'
      << "ill-formed, never valid: " << r.ill_formed_never << '\n'
      << "single-byte octets:      " << r.single_byte_octets << '\n'
      << "style:                   " << to_string(r.style) << '\n';
  out << "witness:                 ";
  if (r.witness) {
    for (std::size_t k = 0; k < r.witness->size(); ++k) {
      TokenId id = (*r.witness)[k];
      out << (k ? " " : "") << id << " [" << to_hex(v.bytes(id)) << "]";
    }
    out << '\n';
  } else {
    out << "none\n";
  }
  if (!r.ill_formed_sample.empty()) {
    out << "ill-formed sample:\n";
    for (const auto& f : r.ill_formed_sample) {
      out << "  " << f.id << '\t' << to_hex(f.bytes) << '\t' << to_string(f.token_class) << '\n';
    }
  }
}

inline std::optional<VocabFormat> parse_format_flag(const std::string& flag) {
  if (flag == "gpt2") return VocabFormat::kGpt2SurfaceJson;
  if (flag == "tokenizer") return VocabFormat::kTokenizerJson;
  if (flag == "tsv") return VocabFormat::kRawBytesTsv;
  return std::nullopt;
}

inline int cmd_audit(const std::string& path, std::optional<VocabFormat> format, bool structured,
                     std::ostream& out, std::ostream& err) {
  Vocabulary v;
  try {
    v = load_vocabulary(path, format);
  } catch (const FormatError& e) {
    err << path << ": position " << e.position() << ": " << e.what() << '\n';
    return kExitUsage;
  }
  VocabReport r = classify_vocabulary(v);
  if (structured) {
    out << report_to_json(r).dump(2) << '\n';
  } else {
    print_report_text(r, v, out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decode

// One row of a decode trace: token bytes, text emitted, and offsets after the row.
struct TraceRow {
  ByteString token_bytes;
  CodeUnitSeq text_emitted;
  std::size_t i = 0;
  std::size_t j = 0;
  // The end-of-stream flush row carries no token.
  bool flush = false;
};

inline constexpr std::string_view kTraceHeader = "byte_token\ttext_emitted\ti\tj";

// Tab, newline, carriage return and backslash in the text column are escaped.
inline std::string format_trace_row(const TraceRow& r) {
  std::string text;
  for (char c : r.text_emitted.view()) {
    switch (c) {
      case '\t': text += "\\t"; break;
      case '\n': text += "\\n"; break;
      case '\r': text += "\\r"; break;
      case '\\': text += "\\\\"; break;
      default: text += c;
    }
  }
  return (r.flush ? std::string("-") : to_hex(r.token_bytes)) + '\t' + text + '\t' + std::to_string(r.i) +
         '\t' + std::to_string(r.j);
}

inline std::optional<TraceRow> parse_trace_row(std::string_view line) {
  std::vector<std::string_view> f;
  for (std::size_t p = 0;;) {
    auto tab = line.find('\t', p);
    f.push_back(line.substr(p, tab == std::string_view::npos ? std::string_view::npos : tab - p));
    if (tab == std::string_view::npos) break;
    p = tab + 1;
  }
  if (f.size() != 4) return std::nullopt;
  TraceRow r;
  r.flush = f[0] == "-";
  if (!r.flush) {
    auto b = from_hex(f[0]);
    if (!b) return std::nullopt;
    r.token_bytes = std::move(*b);
  }
  std::string text;
  for (std::size_t k = 0; k < f[1].size(); ++k) {
    if (f[1][k] == '\\' && k + 1 < f[1].size()) {
      char e = f[1][++k];
      text += e == 't' ? '\t' : e == 'n' ? '\n' : e == 'r' ? '\r' : e;
    } else {
      text += f[1][k];
    }
  }
  auto seq = CodeUnitSeq::try_from_bytes(to_bytes(text));
  if (!seq) return std::nullopt;
  r.text_emitted = std::move(*seq);
  try {
    r.i = std::stoul(std::string(f[2]));
    r.j = std::stoul(std::string(f[3]));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return r;
}

// Whitespace-separated decimal ids. Throws FormatError with the list position.
inline TokenSequence parse_ids(std::string_view content) {
  TokenSequence ids;
  std::size_t p = 0;
  while (true) {
    p = content.find_first_not_of(" \t\r\n", p);
    if (p == std::string_view::npos) break;
    std::size_t end = content.find_first_of(" \t\r\n", p);
    std::string_view word = content.substr(p, end == std::string_view::npos ? std::string_view::npos : end - p);
    std::uint64_t id = 0;
    bool ok = !word.empty() && word.size() <= 10;
    for (char c : word) {
      if (c < '0' || c > '9') {
        ok = false;
        break;
      }
      id = id * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (!ok || id > UINT32_MAX) {
      throw FormatError(ids.size(), "invalid token id '" + std::string(word) + "' at position " +
                                        std::to_string(ids.size()));
    }
    ids.push_back(static_cast<TokenId>(id));
    if (end == std::string_view::npos) break;
    p = end;
  }
  return ids;
}

// Streams text to `out` event by event; with `trace`, writes TraceRows to `err`.
inline int decode_stream(const Vocabulary& v, const TokenSequence& ids, DecodeMode mode, bool trace,
                         std::ostream& out, std::ostream& err) {
  if (trace) err << kTraceHeader << '\n';
  StreamState state;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    TokenId id = ids[k];
    if (!v.contains(id)) {
      err << "unknown token id " << id << " at position " << k << '\n';
      return kExitUsage;
    }
    if (v.is_special(id)) continue;
    EmitEvent ev = advance(state, v, id, mode);
    write_bytes(out, ev.new_text.bytes());
    out.flush();
    if (trace) err << format_trace_row({v.bytes(id), ev.new_text, ev.i_after, ev.j_after, false}) << '\n';
  }
  if (mode == DecodeMode::kRobust) {
    if (auto ev = finish_robust(state, v)) {
      write_bytes(out, ev->new_text.bytes());
      out.flush();
      if (trace) err << format_trace_row({{}, ev->new_text, ev->i_after, ev->j_after, true}) << '\n';
    }
  }
  return kExitOk;
}

inline int cmd_decode(const std::string& vocab_path, std::optional<VocabFormat> format, DecodeMode mode,
                      bool trace, const std::string& ids_source, std::istream& in, std::ostream& out,
                      std::ostream& err) {
  Vocabulary v;
  TokenSequence ids;
  try {
    v = load_vocabulary(vocab_path, format);
    std::string content;
    if (ids_source.empty() || ids_source == "-") {
      content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else {
      content = read_file(ids_source);
    }
    ids = parse_ids(content);
  } catch (const FormatError& e) {
    err << "position " << e.position() << ": " << e.what() << '\n';
    return kExitUsage;
  }
  return decode_stream(v, ids, mode, trace, out, err);
}

// ---------------------------------------------------------------------------
// constrain

inline int cmd_constrain(const std::string& grammar_path, const std::string& vocab_path,
                         const std::string& script_path, std::optional<VocabFormat> format,
                         std::ostream& out, std::ostream& err) {
  std::optional<Grammar> grammar;
  Vocabulary v;
  ScriptedProposer proposer;
  try {
    grammar = parse_grammar(read_file(grammar_path));
    v = load_vocabulary(vocab_path, format);
    proposer = parse_proposer_script(read_file(script_path));
  } catch (const FormatError& e) {
    err << "position " << e.position() << ": " << e.what() << '\n';
    return kExitUsage;
  }
  ByteDfa dfa = ByteDfa::compile(*grammar);
  try {
    ConstrainedRun run = run_constrained(proposer, dfa, v);
    for (std::size_t k = 0; k < run.steps.size(); ++k) {
      const auto& s = run.steps[k];
      const Token& t = v.at(s.chosen);
      err << "step " << k << ": state " << s.state << ", mask " << s.mask_size << ", chose " << s.chosen << " ("
          << (t.special ? "special " + t.name : to_hex(t.bytes)) << ")\n";
    }
    write_bytes(out, run.output);
    out.flush();
  } catch (const ConstraintError& e) {
    err << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming-safe UTF-8 handling for byte-level tokenizer output", "u8stream"};
  app.require_subcommand(1);

  std::string strategy = "replace";
  auto* validate = app.add_subcommand("validate", "Check stdin for well-formed UTF-8");
  validate->add_option("--strategy", strategy, "How ill-formed sections appear on stdout")
      ->check(CLI::IsMember({"fail", "drop", "replace"}));

  std::string audit_path;
  std::string format_flag;
  std::string out_flag = "text";
  auto* audit = app.add_subcommand("audit", "Classify a tokenizer vocabulary");
  audit->add_option("file", audit_path, "Vocabulary file")->required();
  audit->add_option("--format", format_flag, "Vocabulary file format (sniffed when absent)")
      ->check(CLI::IsMember({"gpt2", "tokenizer", "tsv"}));
  audit->add_option("--out", out_flag, "Report form")->check(CLI::IsMember({"text", "structured"}));

  std::string vocab_path;
  std::string mode_flag = "reference";
  bool trace = false;
  std::string ids_source = "-";
  auto* decode_cmd = app.add_subcommand("decode", "Incrementally decode a token id stream");
  decode_cmd->add_option("--vocab", vocab_path, "Vocabulary file")->required();
  decode_cmd->add_option("--vocab-format", format_flag, "Vocabulary file format")
      ->check(CLI::IsMember({"gpt2", "tokenizer", "tsv"}));
  decode_cmd->add_option("--mode", mode_flag, "Decoder mode")->check(CLI::IsMember({"reference", "robust"}));
  decode_cmd->add_flag("--trace", trace, "Write a per-token trace to stderr");
  decode_cmd->add_option("ids", ids_source, "File of token ids, or - for stdin");

  std::string grammar_path;
  std::string script_path;
  auto* constrain = app.add_subcommand("constrain", "Run byte-level constrained generation");
  constrain->add_option("--grammar", grammar_path, "Grammar file, one alternative per line")->required();
  constrain->add_option("--vocab", vocab_path, "Vocabulary file")->required();
  constrain->add_option("--vocab-format", format_flag, "Vocabulary file format")
      ->check(CLI::IsMember({"gpt2", "tokenizer", "tsv"}));
  constrain->add_option("--script", script_path, "Ranked proposals, one line per step")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  std::optional<VocabFormat> format;
  if (!format_flag.empty()) format = parse_format_flag(format_flag);

  if (*validate) {
    Strategy s = strategy == "fail" ? Strategy::kFail : strategy == "drop" ? Strategy::kDrop : Strategy::kReplace;
    return cmd_validate(in, out, err, s);
  }
  if (*audit) return cmd_audit(audit_path, format, out_flag == "structured", out, err);
  if (*decode_cmd) {
    DecodeMode mode = mode_flag == "robust" ? DecodeMode::kRobust : DecodeMode::kReference;
    return cmd_decode(vocab_path, format, mode, trace, ids_source, in, out, err);
  }
  if (*constrain) return cmd_constrain(grammar_path, vocab_path, script_path, format, out, err);
  return kExitUsage;
}

}  // namespace u8stream::cli
