#pragma once

#include <stdexcept>
#include <string>

namespace dqsim {

/// Qubit or clbit index outside the declared register.
class IndexError : public std::out_of_range {
 public:
  explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

/// Malformed input: non-unitary blocks, bad node maps, bad probabilities.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A resource limit was exceeded (backend qubit capacity, comm register size).
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// A two-qubit gate kind with no lowering rule.
class UnsupportedGateError : public std::invalid_argument {
 public:
  UnsupportedGateError(const std::string& what, std::size_t instruction_index)
      : std::invalid_argument(what), instruction_index_(instruction_index) {}
  std::size_t instruction_index() const noexcept { return instruction_index_; }

 private:
  std::size_t instruction_index_;
};

/// Caller broke an operation's precondition (e.g. measurement inside an oracle circuit).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Numeric argument outside the formula's domain.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Experiment configuration could not be accepted.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// The dynamic-QFT rewriter did not find the pattern; the input circuit is untouched.
class RewriteRefused : public std::runtime_error {
 public:
  explicit RewriteRefused(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dqsim
