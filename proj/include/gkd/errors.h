// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception hierarchy shared by every module. The CLI maps these onto exit
// codes: NumericError and InvariantError -> 3, every other Error -> 2.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gkd {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A NaN or infinity escaped a public operation.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A structural invariant of an input was violated (asymmetric adjacency, ...).
class InvariantError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

/// An id referenced by a manifest or graph is absent from the store consulted.
class MissingError : public Error {
public:
    using Error::Error;
};

/// A label or split token outside the declared vocabulary.
class VocabularyError : public InputError {
public:
    using InputError::InputError;
};

class DeterminismError : public Error {
public:
    using Error::Error;
};

/// Malformed binary container. `offset()` is the byte position where decoding failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Malformed text record. `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace gkd
