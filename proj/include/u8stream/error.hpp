// Copyright 2026 The u8stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace u8stream {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-formed UTF-8 under the fail-entirely strategy, or an invalid scalar value.
class Utf8Error : public Error {
 public:
  Utf8Error(std::size_t offset, const std::string& what)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownTokenError : public Error {
 public:
  UnknownTokenError(std::uint32_t id, std::size_t position)
      : Error("unknown token id " + std::to_string(id) + " at position " +
              std::to_string(position)),
        id_(id),
        position_(position) {}
  std::uint32_t id() const noexcept { return id_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::uint32_t id_;
  std::size_t position_;
};

// Greedy tokenization could not cover the input under the fail strategy.
class TokenizeError : public Error {
 public:
  explicit TokenizeError(std::size_t offset)
      : Error("no vocabulary token covers byte offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed vocabulary, grammar, or script file. position is a line number
// for line-oriented formats and a byte offset for JSON.
class FormatError : public Error {
 public:
  FormatError(std::size_t position, const std::string& what)
      : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ConstraintError : public Error {
 public:
  ConstraintError(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace u8stream
