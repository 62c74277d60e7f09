#pragma once

#include <stdexcept>
#include <string>

namespace bgi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or cell.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition (dimension mismatch, argument out of range).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a finite answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bgi
