#pragma once

#include <optional>
#include <string>

#include "r3/autodiff/optimizer.hpp"
#include "r3/autodiff/tensor.hpp"

namespace r3::ad {

/// On-disk model state. Binary, little-endian, version 1:
///
///   "R3CKPT\0\0" | u32 version | str metadata | u64 count
///   count x { str name | u64 rows | u64 cols | f64[rows*cols] }
///   u8 has_optimizer
///   [ u64 step | u64 count | count x { str name | u64 rows | u64 cols | f64 m[] | f64 u[] } ]
///
/// where str is u64 length followed by raw bytes.
struct Checkpoint {
  std::string metadata;
  ParameterStore params;
  std::optional<AdamaxState> optimizer;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Copies every parameter of `target` from `source` by name. Throws when a
/// parameter is missing from `source` or its shape differs; the message names
/// the parameter. Grads of `target` are zeroed.
void copy_parameters(const ParameterStore& source, ParameterStore& target);

}  // namespace r3::ad
