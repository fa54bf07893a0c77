#include "l1l2/diagnostics.hpp"

#include "l1l2/error.hpp"

#include <algorithm>
#include <cmath>

namespace l1l2 {

TraceAudit audit_trace(const IterateTrace& trace, Objective objective, double alpha,
                       double feas_tol, double slack, bool check_feasibility) {
  TraceAudit audit;
  const auto& e = trace.entries;
  for (std::size_t t = 0; t < e.size(); ++t) {
    if (check_feasibility) {
      audit.worst_q = std::max(audit.worst_q, e[t].q);
      if (e[t].q > feas_tol) ++audit.feasibility_violations;
    }
    if (t == 0) continue;
    const double step_sq = e[t].step_norm * e[t].step_norm;
    const double bound = objective == Objective::ratio_l1_l2
                             ? alpha / (2.0 * e[t].x_norm) * step_sq
                             : alpha / 2.0 * step_sq;
    const double gap = (e[t - 1].omega - e[t].omega) - bound;
    if (gap < -slack) {
      ++audit.descent_violations;
      audit.worst_descent_gap = std::min(audit.worst_descent_gap, gap);
    }
    if (e[t].omega > e[t - 1].omega + slack) ++audit.monotonicity_violations;
  }
  return audit;
}

LinearFit fit_line(std::span<const double> t, std::span<const double> v) {
  if (t.size() != v.size() || t.size() < 2) {
    throw InvalidParameter("fit_line needs two or more paired samples");
  }
  const double count = static_cast<double>(t.size());
  double mt = 0.0;
  double mv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mv += v[i];
  }
  mt /= count;
  mv /= count;
  double stt = 0.0;
  double stv = 0.0;
  double svv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    stv += (t[i] - mt) * (v[i] - mv);
    svv += (v[i] - mv) * (v[i] - mv);
  }
  LinearFit fit;
  fit.slope = stv / stt;
  fit.intercept = mv - fit.slope * mt;
  fit.r_squared = svv > 0.0 ? (stv * stv) / (stt * svv) : 1.0;
  return fit;
}

}  // namespace l1l2
