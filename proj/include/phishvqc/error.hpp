// Exception hierarchy shared by every phishvqc module.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace phishvqc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (bad qubit index, length mismatch).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// The objective returned a non-finite value; carries the offending point.
class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& what, std::vector<double> params)
      : Error(what), params_(std::move(params)) {}

  const std::vector<double>& params() const noexcept { return params_; }

 private:
  std::vector<double> params_;
};

}  // namespace phishvqc
