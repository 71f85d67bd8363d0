// Copyright 2026 The pernorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PERNORM_ERROR_HPP_
#define PERNORM_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pernorm {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownLanguageError : public Error {
 public:
  explicit UnknownLanguageError(const std::string& tag)
      : Error("unknown language tag '" + tag + "'"), tag_(tag) {}
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

// Malformed UTF-8 input. `line` is 1-based, 0 when not line-oriented.
class Utf8Error : public Error {
 public:
  Utf8Error(std::size_t line, std::size_t byte_offset)
      : Error(Describe(line, byte_offset)), line_(line), offset_(byte_offset) {}
  std::size_t line() const { return line_; }
  std::size_t byte_offset() const { return offset_; }

 private:
  static std::string Describe(std::size_t line, std::size_t offset) {
    std::string msg = "malformed UTF-8";
    if (line > 0) msg += " on line " + std::to_string(line);
    return msg + " at byte " + std::to_string(offset);
  }
  std::size_t line_;
  std::size_t offset_;
};

// Base of all grammar load/validation failures.
class GrammarError : public Error {
 public:
  using Error::Error;
};

class GrammarParseError : public GrammarError {
 public:
  GrammarParseError(const std::string& source, std::size_t line,
                    std::size_t column, const std::string& what)
      : GrammarError(source + ":" + std::to_string(line) + ":" +
                     std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class DuplicateRuleError : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class InventoryViolationError : public GrammarError {
 public:
  InventoryViolationError(const std::string& what, char32_t codepoint)
      : GrammarError(what), codepoint_(codepoint) {}
  char32_t codepoint() const { return codepoint_; }

 private:
  char32_t codepoint_;
};

// A caller broke a documented precondition (empty corpus, short sample...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace pernorm

#endif  // PERNORM_ERROR_HPP_
