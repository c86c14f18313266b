#pragma once

#include <stdexcept>
#include <string>

namespace fvd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range argument or malformed structure.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The noise schedule (or its combination with an eta value) cannot
// support the requested transition.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

// Non-finite or dimensionally inconsistent sample-space input.
class InputError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was breached; should be unreachable.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, double measured_mass)
      : Error(what), measured_mass_(measured_mass) {}
  double measured_mass() const { return measured_mass_; }

 private:
  double measured_mass_;
};

}  // namespace fvd
