#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bowden {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructor or operation received a parameter that violates its domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// transmission
class OffsetCurveViolation : public Error {
 public:
  using Error::Error;
};
class NonPositiveLength : public Error {
 public:
  using Error::Error;
};

// plant
class NonFiniteState : public Error {
 public:
  using Error::Error;
};
class InvariantBreach : public Error {
 public:
  using Error::Error;
};

// control
class FaultedController : public Error {
 public:
  using Error::Error;
};
class ControllerNotReady : public Error {
 public:
  using Error::Error;
};
class PretensionTimeout : public Error {
 public:
  using Error::Error;
};

// hand
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class NonFiniteCommand : public Error {
 public:
  using Error::Error;
};

// estimation
class DegenerateData : public Error {
 public:
  using Error::Error;
};
class NonPositiveTension : public Error {
 public:
  using Error::Error;
};

/// Scenario config failed to parse or validate. `field` is a dotted path
/// into the document; `line` is set for syntax errors (1-based, 0 if unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message, std::size_t line = 0)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

/// CSV input did not match the expected schema. Row is 1-based counting the
/// header as row 1; 0 means the problem is not tied to a row.
class CsvSchemaError : public Error {
 public:
  CsvSchemaError(std::string column, std::size_t row, const std::string& message)
      : Error(message), column_(std::move(column)), row_(row) {}

  const std::string& column() const { return column_; }
  std::size_t row() const { return row_; }

 private:
  std::string column_;
  std::size_t row_;
};

/// A scenario run failed after the config was accepted (controller fault,
/// numerical breakdown).
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace bowden
