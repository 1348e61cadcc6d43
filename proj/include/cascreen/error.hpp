#pragma once

#include <stdexcept>
#include <string>

namespace cascreen {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed file structure: bad CSV header, bad JSON config, unknown keys.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Well-formed input whose content is invalid: out-of-range answers,
/// empty datasets, rows that fail validation in strict mode.
class DataError : public Error {
public:
  using Error::Error;
};

/// Failures while fitting a model: single-class data, divergence.
class TrainingError : public Error {
public:
  using Error::Error;
};

}  // namespace cascreen
