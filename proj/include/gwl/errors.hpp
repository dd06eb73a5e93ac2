#ifndef GWL_ERRORS_HPP
#define GWL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gwl {

// Base for every error the library raises on bad input or failed I/O.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A model was asked to evaluate a config that does not fit its space.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A model cannot be built over the requested config space.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed file content (JSON, CSV, weights, checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::string required)
      : Error(what), required_(std::move(required)) {}

  const std::string& required() const noexcept { return required_; }

 private:
  std::string required_;
};

}  // namespace gwl

#endif  // GWL_ERRORS_HPP
