#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace cspan {

// A scalar function of a flat parameter vector together with its
// reverse-mode gradient. Implementations typically build a Graph<double>.
struct DifferentiableFn {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_rel_err < tolerance; }
};

// Central finite differences against the reverse-mode gradient,
// coordinate-wise. Relative error is |a - n| / max(|a|, |n|, 1e-6).
// The denominator floor keeps coordinates whose true gradient sits below
// the finite-difference noise level (~|f| * 1e-16 / step) from reporting
// rounding noise as relative error.
inline GradCheckReport grad_check(const DifferentiableFn& f, std::span<const double> point,
                                  double step, double tolerance) {
  GradCheckReport report;
  report.tolerance = tolerance;
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> analytic = f.gradient(x);
  if (analytic.size() != x.size()) throw NumericError("gradient size does not match point size");
  for (std::size_t i = 0; i < x.size(); ++i) {
    double saved = x[i];
    x[i] = saved + step;
    double fp = f.value(x);
    x[i] = saved - step;
    double fm = f.value(x);
    x[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("function not finite at perturbed point");
    double numeric = (fp - fm) / (2.0 * step);
    double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-6});
    double rel = std::fabs(analytic[i] - numeric) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_index = i;
      report.analytic_at_worst = analytic[i];
      report.numeric_at_worst = numeric;
    }
  }
  return report;
}

}  // namespace cspan
