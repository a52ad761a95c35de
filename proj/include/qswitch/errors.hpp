#pragma once

#include <stdexcept>
#include <string>

namespace qswitch {

/// Argument outside the operation's domain (bad index, odd site count, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-side contract was violated, e.g. a non-unitary operator.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A forced measurement outcome has (numerically) zero probability.
class ImpossibleOutcomeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed object does not have the structure the model predicts.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Work requested exceeds the dense-diagonalization budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Protocol transcript failed validation; carries the offending event.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(long seq, const std::string& what)
      : std::runtime_error("event " + std::to_string(seq) + ": " + what), seq_(seq) {}
  long seq() const noexcept { return seq_; }

 private:
  long seq_;
};

}  // namespace qswitch
