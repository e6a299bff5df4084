#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace htspg {

// Invalid hyperparameters, mismatched dimensions, malformed config files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inputs outside the domain of a density or score (NaN/inf actions).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke an operation's precondition (e.g. unclipped action passed to
// an environment).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A non-finite quantity appeared during estimation or an update.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace htspg
