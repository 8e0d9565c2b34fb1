#include "r3/autodiff/fd_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace r3::ad {

namespace {

double evaluate(const LossBuilder& build) {
  Graph g;
  return g.scalar(build(g));
}

}  // namespace

FdReport fd_check(const LossBuilder& build, const std::vector<Parameter*>& params, double step) {
  std::vector<Matrix> analytic;
  {
    Graph g;
    Var loss = build(g);
    const double first = g.scalar(loss);
    if (evaluate(build) != first) {
      throw std::runtime_error("fd_check: loss builder is not deterministic");
    }
    for (Parameter* p : params) p->grad.setZero();
    g.backward(loss);
    for (Parameter* p : params) analytic.push_back(p->grad);
  }

  FdReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double saved = x;
      x = saved + step;
      const double hi = x;
      const double up = evaluate(build);
      x = saved - step;
      const double lo = x;
      const double down = evaluate(build);
      x = saved;
      // Divide by the step actually taken after rounding.
      const double numeric = (up - down) / (hi - lo);
      const double a = analytic[k].data()[i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(numeric));
      report.max_abs_error = std::max(report.max_abs_error, std::abs(a - numeric));
      ++report.entries;
      if (err > report.max_rel_error || report.worst_index < 0) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        report.worst_param = p.name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace r3::ad
