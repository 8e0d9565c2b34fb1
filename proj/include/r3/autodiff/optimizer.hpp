#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "r3/autodiff/tensor.hpp"

namespace r3::ad {

struct AdamaxOptions {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First moment and exponentially weighted infinity norm for one parameter.
struct AdamaxSlot {
  Matrix m;
  Matrix u;
};

struct AdamaxState {
  std::uint64_t step = 0;
  std::map<std::string, AdamaxSlot> slots;
};

/// Adamax (Kingma & Ba):
///   m <- b1 m + (1 - b1) g
///   u <- max(b2 u, |g|)
///   p <- p - lr / (1 - b1^t) * m / (u + eps)
/// Slots are created lazily at zero. Throws ShapeError when a stored slot
/// disagrees with its parameter.
void adamax_step(ParameterStore& params, AdamaxState& state, const AdamaxOptions& options);

/// Rescales all grads so that their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(ParameterStore& params, double max_norm);

}  // namespace r3::ad
