// Error taxonomy shared by every component. All recoverable failures are
// typed exceptions so callers can distinguish bad input from internal bugs.
#pragma once

#include <stdexcept>
#include <string>

namespace orgym {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A model violates a structural invariant (duplicate names, empty terms,
// crossed bounds, unknown variable in a constraint, ...).
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

// Malformed JSON or a JSON document that does not match the expected schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

// The LP solver exceeded its wall-clock budget or iteration cap.
class SolverTimeoutError : public Error {
 public:
  using Error::Error;
};

// A sabotage attempt could not produce a verified-infeasible instance from
// the given seed model.
class InjectionFailedError : public Error {
 public:
  using Error::Error;
};

// The seed-model pool ran out of structurally eligible candidates before a
// benchmark slot could be filled.
class PoolExhaustedError : public Error {
 public:
  using Error::Error;
};

// A state the pipeline guarantees (e.g. a freshly loaded instance must solve
// INFEASIBLE) did not hold at runtime.
class OracleDisagreementError : public Error {
 public:
  using Error::Error;
};

// compute_iis was called on a model that is not INFEASIBLE.
class NotInfeasibleError : public Error {
 public:
  using Error::Error;
};

// A primal point handed to constraint_slacks is missing a variable that
// appears in some constraint.
class UnknownVariableError : public Error {
 public:
  using Error::Error;
};

// The line-delimited JSON exchange with an external agent broke down
// (bad frame, wrong sequence number, timeout, dead subprocess).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// An external agent subprocess could not be started.
class SpawnError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// An external agent did not reply within its per-message deadline.
class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// A metric aggregation was asked to run over zero records.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// A stratified sample asked for more instances than a tier holds.
class InsufficientPoolError : public Error {
 public:
  using Error::Error;
};

// A percentile triple or other numeric input lies outside the function's
// mathematical domain (non-monotone percentiles, quantile at 0 or 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace orgym
