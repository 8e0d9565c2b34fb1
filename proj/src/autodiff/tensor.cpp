#include "r3/autodiff/tensor.hpp"

#include <cmath>
#include <sstream>

namespace r3::ad {

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

ParameterStore::ParameterStore(const ParameterStore& other) { *this = other; }

ParameterStore& ParameterStore::operator=(const ParameterStore& other) {
  if (this == &other) return *this;
  params_.clear();
  index_ = other.index_;
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
  return *this;
}

Parameter& ParameterStore::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (rows <= 0 || cols <= 0) {
    throw ShapeError("parameter '" + name + "' needs a positive shape");
  }
  if (index_.count(name) != 0) {
    throw std::invalid_argument("parameter '" + name + "' registered twice");
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Matrix::Zero(rows, cols);
  p->grad = Matrix::Zero(rows, cols);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
  if (auto* p = find(name)) return *p;
  throw std::out_of_range("no parameter named '" + name + "'");
}

const Parameter& ParameterStore::at(const std::string& name) const {
  if (const auto* p = find(name)) return *p;
  throw std::out_of_range("no parameter named '" + name + "'");
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

double ParameterStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

std::vector<Parameter*> ParameterStore::with_prefix(const std::string& prefix) {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
  }
  return out;
}

}  // namespace r3::ad
