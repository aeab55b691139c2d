#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace psadmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

/// A Cholesky pivot was non-positive: the matrix is not (numerically)
/// positive definite.
class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class NotInConstellation : public Error {
 public:
  using Error::Error;
};

/// Detector parameters for which the layer subproblem is not strictly convex
/// (4^{q-1} rho <= alpha_q). The closed-form layer update is invalid there.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string message, int line, std::string key)
      : Error(format(message, line, key)), line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(const std::string& message, int line,
                            const std::string& key) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!key.empty()) out += " (key '" + key + "')";
    return out + ": " + message;
  }

  int line_;
  std::string key_;
};

/// Carries every violated constraint, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration:";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace psadmm
