#pragma once

#include <stdexcept>
#include <string>

namespace delaygp {

// Each error maps to one failure class of the public API; the CLI turns them
// into exit codes.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A state lies outside the declared box domain of a model.
class DomainViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A linear matrix equation has no (unique) solution, e.g. non-Hurwitz A.
class NoSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An assumption required for bound certification does not hold.
class PreconditionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The simulated state left the guard box.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace delaygp
