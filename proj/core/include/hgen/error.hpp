#pragma once

#include <stdexcept>
#include <string>

namespace hgen {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file or document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally well-formed input that violates a data invariant.
/// The message names the violated invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Incompatible tensor/matrix shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Training aborted (e.g. non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace hgen
