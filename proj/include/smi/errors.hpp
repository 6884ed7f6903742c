#pragma once

#include <stdexcept>
#include <string>

namespace smi {

/// Caller broke an operation's contract (dimension mismatch, invalid argument, failed precondition).
struct contract_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Model lacks an optional capability the operation needs (e.g. a closed-form log p(Y|phi)).
struct capability_error : std::logic_error {
  using std::logic_error::logic_error;
};

/// Ill-conditioned or non-PSD matrices and similar numerical failures.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem too large for an exact (enumerating) routine.
struct capacity_error : std::length_error {
  using std::length_error::length_error;
};

/// Input data violates the model's data invariants.
struct data_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct selection_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

} // namespace smi
