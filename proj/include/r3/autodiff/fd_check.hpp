#pragma once

#include <functional>
#include <string>
#include <vector>

#include "r3/autodiff/graph.hpp"

namespace r3::ad {

/// Builds a scalar loss on a fresh graph from the current parameter values.
using LossBuilder = std::function<Var(Graph&)>;

struct FdReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries = 0;
};

/// Compares the analytic gradient of `build` against central differences for
/// every entry of `params`:  |analytic - numeric| / max(1e-8, |numeric|).
/// Leaves parameter values as it found them; overwrites their grads.
/// Throws std::runtime_error if two evaluations of `build` disagree.
FdReport fd_check(const LossBuilder& build, const std::vector<Parameter*>& params, double step = 1e-5);

}  // namespace r3::ad
