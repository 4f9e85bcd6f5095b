#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ltm {

// Base for every domain error; the CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Carries every invariant violation found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<std::string> violations_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class DegenerateSteadyState : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonMonotoneGain : public SolverError {
 public:
  NonMonotoneGain(const std::string& what, double root_a, double root_b)
      : SolverError(what), roots_{root_a, root_b} {}
  const double* candidate_roots() const noexcept { return roots_; }

 private:
  double roots_[2];
};

class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltm
