#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlgru/autodiff.hpp"
#include "stlgru/matrix.hpp"

namespace stlgru {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Every learnable tensor of a model, in a stable registration order.
class ParameterStore {
public:
  Matrix& add(std::string name, Matrix value);

  bool contains(const std::string& name) const;
  Matrix& value(const std::string& name);
  const Matrix& value(const std::string& name) const;
  const Matrix& grad(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::vector<Parameter>& entries() { return params_; }
  const std::vector<Parameter>& entries() const { return params_; }

  void zero_grad();

private:
  std::size_t index_of(const std::string& name) const;
  std::vector<Parameter> params_;
};

/// Parameters registered as leaves on one tape, index-aligned with the store.
class Bindings {
public:
  Bindings(Tape& tape, const ParameterStore& store);
  Var operator[](const std::string& name) const;
  Var at(std::size_t i) const { return vars_[i]; }
  std::size_t size() const { return vars_.size(); }

private:
  std::vector<std::string> names_;
  std::vector<Var> vars_;
};

/// Per-parameter gradients, index-aligned with a ParameterStore.
using GradientSet = std::vector<Matrix>;

/// Runs backward from `loss_root` and returns ∂L/∂p for every parameter;
/// parameters off the path get exact zeros. Also writes the store's grad slots.
GradientSet gradient_of_scalar(Tape& tape, Var loss_root, const Bindings& bound,
                               ParameterStore& params);

class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using ScalarObjective = std::function<double(const ParameterStore&)>;

/// Central differences (f(p+eps) − f(p−eps)) / (2·eps), one coordinate at a time.
GradientSet finite_difference_gradient(const ScalarObjective& f, const ParameterStore& params,
                                       double eps);

/// ‖a − n‖∞ / max(1, ‖n‖∞)
double gradient_relative_error(const Matrix& analytic, const Matrix& numeric);

} // namespace stlgru
