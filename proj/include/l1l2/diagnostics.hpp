#pragma once

#include "l1l2/drivers.hpp"

#include <limits>
#include <span>

namespace l1l2 {

/// Violation counts of the per-iteration guarantees recorded in a trace.
struct TraceAudit {
  int descent_violations = 0;      // omega_t - omega_{t+1} < alpha/(2||x^{t+1}||) ||step||^2 - slack
  int feasibility_violations = 0;  // q(x^t) > feas_tol
  int monotonicity_violations = 0; // omega_{t+1} > omega_t + slack
  double worst_descent_gap = 0.0;  // most negative (lhs - rhs), 0 if none
  double worst_q = -std::numeric_limits<double>::infinity();
};

/// Checks sufficient descent and feasibility along a recorded trace.
///
/// For the ratio objective the descent bound is alpha/(2||x^{t+1}||) ||step||^2;
/// for plain l1 it is alpha/2 ||step||^2. check_feasibility is off for traces
/// of the noiseless driver, whose q column holds ||A x - b|| instead.
TraceAudit audit_trace(const IterateTrace& trace, Objective objective, double alpha,
                       double feas_tol, double slack = 1e-10, bool check_feasibility = true);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (t_i, v_i).
LinearFit fit_line(std::span<const double> t, std::span<const double> v);

}  // namespace l1l2
