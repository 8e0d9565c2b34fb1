#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace r3::ad {

/// Dense row-major matrix of doubles. Every value in the model lives in one.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string shape_string(const Matrix& m);

/// A named trainable tensor. `grad` always has the same shape as `value`.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Owns every trainable tensor of a model. Iteration follows registration
/// order, which is also the checkpoint order.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore& other);
  ParameterStore& operator=(const ParameterStore& other);
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

  Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  double grad_norm() const;

  /// Parameters whose name starts with `prefix`.
  std::vector<Parameter*> with_prefix(const std::string& prefix);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace r3::ad
