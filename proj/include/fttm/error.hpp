#pragma once

#include <stdexcept>
#include <string>

namespace fttm {

// Base class for everything the library throws on bad input or failed runs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied value. `field()` carries a dotted config path such as
// "sut.tones" or "sweep.period" when the value came from a scenario document.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A well-formed request that could not be carried out (no pulse found,
// bracket does not contain a minimum, ...).
class RuntimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace fttm
