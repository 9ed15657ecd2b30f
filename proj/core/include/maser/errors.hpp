#pragma once

#include <stdexcept>
#include <string>

namespace maser {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested object does not fit in the given Fock-space truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

// Input lies on a degenerate manifold where the requested quantity is
// undefined (zero denominators, undefined odd cat at alpha=0, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A floating-point computation lost the guarantees it needs (failed
// Hermitian clipping, non-converged extrapolation, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Iterative refinement did not settle within tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Exact integer result exceeds the representable range requested.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Candidate state failed its stationarity check.
class NotStationaryError : public Error {
 public:
  NotStationaryError(const std::string& msg, double residual_)
      : Error(msg + " (residual " + std::to_string(residual_) + ")"),
        residual(residual_) {}
  double residual;
};

// Kernel of a generator does not have the dimension the caller assumed.
class KernelDimensionError : public Error {
 public:
  using Error::Error;
};

// Recurrence has no normalizable solution.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Underlying eigensolver failed to converge.
class EigensolverError : public Error {
 public:
  using Error::Error;
};

// Coherence magnitude incompatible with the populations.
class InvalidCoherenceError : public Error {
 public:
  using Error::Error;
};

// Supplied partition does not cover the state's support.
class PartitionError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration text.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line_, int column_)
      : Error(msg + " at line " + std::to_string(line_) + ", column " +
              std::to_string(column_)),
        line(line_),
        column(column_) {}
  int line;
  int column;
};

// Well-formed configuration with invalid or inconsistent values.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& msg, const std::string& field_)
      : Error(msg + " (field: " + field_ + ")"), field(field_) {}
  std::string field;
};

// Filesystem failure, annotated with the offending path.
class IOError : public Error {
 public:
  IOError(const std::string& msg, const std::string& path_)
      : Error(msg + ": " + path_), path(path_) {}
  std::string path;
};

}  // namespace maser
