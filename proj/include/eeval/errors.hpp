#pragma once

#include <stdexcept>
#include <string>

namespace eeval {

// Base class for every error raised by the library. Subclasses exist so
// callers (and tests) can distinguish failure modes without string matching.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset loading / saving.
class MissingFileError : public Error {
 public:
  using Error::Error;
};
class ManifestError : public Error {
 public:
  using Error::Error;
};
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};
class NonFiniteLogitError : public Error {
 public:
  using Error::Error;
};
class LabelOutOfRangeError : public Error {
 public:
  using Error::Error;
};
class NonIncreasingCostsError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};

// Numeric operations.
class NonFiniteInputError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};
class EmptyInputError : public Error {
 public:
  using Error::Error;
};
class EmptySplitError : public Error {
 public:
  using Error::Error;
};

// AUROC is undefined when one class is absent; callers that tolerate this
// catch the exception and report the score as undefined.
class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};

class NonPositiveQError : public Error {
 public:
  using Error::Error;
};
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eeval
