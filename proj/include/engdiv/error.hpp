#pragma once

#include <stdexcept>
#include <string>

namespace engdiv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON, JSONL, TSV).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Vector/matrix dimensions that do not agree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// A value outside its admissible range (probabilities, δ, budgets).
class RangeError : public Error {
public:
  using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
public:
  using Error::Error;
};

/// Numerical failure that cannot occur on valid inputs.
class InternalError : public Error {
public:
  using Error::Error;
};

/// Simplex hit its pivot cap.
class IterationLimitError : public Error {
public:
  IterationLimitError(std::size_t cap)
      : Error("simplex iteration cap exceeded (cap = " + std::to_string(cap) + ")"),
        cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

private:
  std::size_t cap_;
};

}  // namespace engdiv
