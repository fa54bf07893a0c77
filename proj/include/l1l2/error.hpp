#pragma once

#include <stdexcept>
#include <string>

namespace l1l2 {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Sensing matrix fails the full-row-rank test.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// A starting point (or the constructed one) violates q(x) <= feas_tol.
class InfeasibleStart : public Error {
 public:
  using Error::Error;
};

/// An inner solver hit its iteration budget; residuals are kept for diagnostics.
class SubsolverNotConverged : public Error {
 public:
  SubsolverNotConverged(const std::string& what, double primal_residual,
                        double dual_residual)
      : Error(what + " (primal residual " + std::to_string(primal_residual) +
              ", dual residual " + std::to_string(dual_residual) + ")"),
        primal_residual_(primal_residual),
        dual_residual_(dual_residual) {}

  double primal_residual() const { return primal_residual_; }
  double dual_residual() const { return dual_residual_; }

 private:
  double primal_residual_;
  double dual_residual_;
};

/// The MBA curvature-doubling loop exceeded its bound.
class DoublingLimitExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace l1l2
