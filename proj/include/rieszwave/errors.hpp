#ifndef RIESZWAVE_ERRORS_HPP
#define RIESZWAVE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rieszwave {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach its requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double partial_estimate)
      : std::runtime_error(what), partial_(partial_estimate) {}
  double partial_estimate() const noexcept { return partial_; }

 private:
  double partial_;
};

/// The normalization battery disagreed beyond its threshold.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation needed state (e.g. a calibration) that is not available yet.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rieszwave

#endif  // RIESZWAVE_ERRORS_HPP
