#pragma once

#include <stdexcept>
#include <string>

namespace manifold {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, malformed or inconsistent input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Parse failure with its location: 0-based data row and column for point
/// files, 1-based line number (as row) for graph files.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, long row, long column = -1)
      : InputError(what), row_(row), column_(column) {}
  long row() const noexcept { return row_; }
  long column() const noexcept { return column_; }

 private:
  long row_;
  long column_;
};

/// A solver or estimator failed on otherwise valid input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Arguments violate an operation's preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace manifold
