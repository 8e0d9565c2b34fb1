#include "r3/autodiff/optimizer.hpp"

#include <cmath>

namespace r3::ad {

void adamax_step(ParameterStore& params, AdamaxState& state, const AdamaxOptions& options) {
  if (!(options.lr > 0.0)) throw std::invalid_argument("adamax: learning rate must be positive");
  for (const auto& p : params) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) {
      throw ShapeError("adamax: grad " + shape_string(p->grad) + " vs param '" + p->name + "' " +
                       shape_string(p->value));
    }
    auto it = state.slots.find(p->name);
    if (it == state.slots.end()) {
      AdamaxSlot slot{Matrix::Zero(p->value.rows(), p->value.cols()),
                      Matrix::Zero(p->value.rows(), p->value.cols())};
      it = state.slots.emplace(p->name, std::move(slot)).first;
    }
    const AdamaxSlot& s = it->second;
    if (s.m.rows() != p->value.rows() || s.m.cols() != p->value.cols() || s.u.rows() != p->value.rows() ||
        s.u.cols() != p->value.cols()) {
      throw ShapeError("adamax: state for '" + p->name + "' is " + shape_string(s.m) + ", param is " +
                       shape_string(p->value));
    }
  }

  ++state.step;
  const double correction = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double rate = options.lr / correction;
  for (auto& p : params) {
    AdamaxSlot& s = state.slots.at(p->name);
    s.m = options.beta1 * s.m + (1.0 - options.beta1) * p->grad;
    s.u = (options.beta2 * s.u).cwiseMax(p->grad.cwiseAbs());
    p->value.array() -= rate * s.m.array() / (s.u.array() + options.eps);
  }
}

double clip_grad_norm(ParameterStore& params, double max_norm) {
  const double norm = params.grad_norm();
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : params) p->grad *= factor;
  }
  return norm;
}

}  // namespace r3::ad
