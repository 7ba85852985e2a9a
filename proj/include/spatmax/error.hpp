#pragma once

#include <stdexcept>
#include <string>

namespace spatmax {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A value fell outside the support of its marginal distribution.
/// Likelihood code converts these into +inf NLL instead of throwing.
class SupportError : public Error {
 public:
  SupportError(const std::string& msg, std::string site = {}, double value = 0.0)
      : Error(msg), site_id(std::move(site)), offending_value(value) {}
  std::string site_id;
  double offending_value;
};

/// Malformed or inconsistent input data (CSV parsing, schema violations).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg, long line = -1)
      : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_number(line) {}
  long line_number;
};

/// Numerical failure: singular matrices, failed brackets, infeasible starts.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// Bad command-line or configuration usage.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

}  // namespace spatmax
