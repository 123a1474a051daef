#pragma once

#include <stdexcept>
#include <string>

namespace stablewalk {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter lies outside its mathematical domain (alpha outside (0,2),
/// non-increasing anchors, ell out of range, ...).
class parameter_error : public error {
public:
  using error::error;
};

/// A requested quantity cannot be produced at the needed accuracy
/// (table horizon too short, anchor list exhausted). Carries the residual
/// bound in the message.
class accuracy_error : public error {
public:
  using error::error;
};

/// The object violates a structural requirement: reducible generator,
/// detailed-balance failure, degenerate single-state ensemble.
class structural_error : public error {
public:
  using error::error;
};

/// Iterative solver exhausted its budget. Carries the best residual.
class convergence_error : public error {
public:
  convergence_error(const std::string& what, double best_residual)
      : error(what), best_residual(best_residual) {}
  double best_residual;
};

/// State space larger than the configured memory budget.
class capacity_error : public error {
public:
  using error::error;
};

/// A documented precondition of an operation was not met by the caller.
class contract_error : public error {
public:
  using error::error;
};

/// Interaction rate fits neither case of the zero-range gap theorem.
class classification_error : public error {
public:
  using error::error;
};

/// The multiscale certificate cannot be assembled (theta >= 1, or no
/// burn-in index exists on the verified horizon). Carries the failing
/// condition in the message.
class infeasible_error : public error {
public:
  using error::error;
};

/// Semigroup mass leaked past the configured budget; a larger box is needed.
class truncation_error : public error {
public:
  using error::error;
};

/// Box cannot be tiled exactly by blocks of the requested width.
class alignment_error : public error {
public:
  using error::error;
};

/// Jump sampling would need rate values beyond the declared horizon.
class sampling_error : public error {
public:
  using error::error;
};

/// Malformed input file. Message includes the line number.
class parse_error : public error {
public:
  using error::error;
};

}  // namespace stablewalk
