#pragma once

#include <stdexcept>
#include <string>

namespace cqg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor shapes do not conform to an operation's signature.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Lookup or pick index outside the valid range.
class IndexError : public Error {
public:
  using Error::Error;
};

/// masked_softmax over an all-false mask, or an all-placeholder sub-question.
class MaskError : public Error {
public:
  using Error::Error;
};

/// Invalid model/training configuration (bad dims, unknown keys, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed input file; carries the offending line number when known.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// Not enough samples to produce the requested dataset splits.
class SplitError : public Error {
public:
  using Error::Error;
};

/// A sub-question pool was required but empty.
class EmptyPoolError : public Error {
public:
  using Error::Error;
};

/// Distributions to aggregate are not over the same support.
class SupportError : public Error {
public:
  using Error::Error;
};

/// Bad training data (empty reference, missing sub-question, ...).
class DataError : public Error {
public:
  using Error::Error;
};

/// Training diverged or could not proceed.
class TrainError : public Error {
public:
  using Error::Error;
};

}  // namespace cqg
