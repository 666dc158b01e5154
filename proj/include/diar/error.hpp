// diar/error.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIAR_ERROR_HPP_
#define DIAR_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace diar {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string &msg) : Error(msg) {}
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string &msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Malformed binary input; carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string &msg, std::uint64_t byte_offset)
      : Error(msg + " (byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::uint64_t byte_offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class BadMagicError : public FormatError {
 public:
  BadMagicError(const std::string &msg, std::uint64_t off)
      : FormatError(msg, off) {}
};

class DimMismatchError : public FormatError {
 public:
  DimMismatchError(const std::string &msg, std::uint64_t off)
      : FormatError(msg, off) {}
};

class NonFiniteError : public FormatError {
 public:
  NonFiniteError(const std::string &msg, std::uint64_t off)
      : FormatError(msg, off) {}
};

/// File system / stream failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string &msg) : Error(msg) {}
};

/// Data is structurally valid but unusable (empty domain, zero occupancy, ...).
class DataError : public Error {
 public:
  explicit DataError(const std::string &msg) : Error(msg) {}
};

}  // namespace diar

#endif  // DIAR_ERROR_HPP_
