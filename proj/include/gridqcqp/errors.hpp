#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridqcqp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text in a case file. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A mandatory table or field is missing, or the tables are inconsistent.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// The case file declares a format version this library does not read.
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

/// The electrical model cannot be built (no slack, zero impedance, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Aggregate generation limits cannot meet the demand.
class InfeasibleBoundError : public Error {
 public:
  InfeasibleBoundError(const std::string& what, double shortfall_mw)
      : Error(what), shortfall_mw_(shortfall_mw) {}

  /// Signed MW amount by which demand lies outside [sum Pmin, sum Pmax].
  double shortfall_mw() const noexcept { return shortfall_mw_; }

 private:
  double shortfall_mw_;
};

/// The relative gap is undefined (non-positive lower bound).
class UndefinedGapError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions do not agree with the problem.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridqcqp
