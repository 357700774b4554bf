#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bisurv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: missing CSV column, bad flag combination, bad config.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A data row that does not parse or lies outside its domain.
class RowError : public Error {
 public:
  RowError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// The data violate an assumption the estimators rely on (S(tau) > 0 etc.).
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

// Censoring KM reached zero where a variance term divides by it.
class SupportExhausted : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class UnsupportedModel : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bisurv
