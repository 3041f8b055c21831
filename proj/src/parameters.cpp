#include "stlgru/parameters.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace stlgru {

Matrix& ParameterStore::add(std::string name, Matrix value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  Matrix grad(value.rows(), value.cols());
  params_.push_back(Parameter{std::move(name), std::move(value), std::move(grad)});
  return params_.back().value;
}

std::size_t ParameterStore::index_of(const std::string& name) const {
  const auto it = std::find_if(params_.begin(), params_.end(),
                               [&](const Parameter& p) { return p.name == name; });
  if (it == params_.end()) throw std::out_of_range("unknown parameter " + name);
  return static_cast<std::size_t>(it - params_.begin());
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

Matrix& ParameterStore::value(const std::string& name) { return params_[index_of(name)].value; }
const Matrix& ParameterStore::value(const std::string& name) const {
  return params_[index_of(name)].value;
}
const Matrix& ParameterStore::grad(const std::string& name) const {
  return params_[index_of(name)].grad;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad = Matrix(p.value.rows(), p.value.cols());
}

Bindings::Bindings(Tape& tape, const ParameterStore& store) {
  for (const auto& p : store.entries()) {
    names_.push_back(p.name);
    vars_.push_back(tape.leaf(p.value));
  }
}

Var Bindings::operator[](const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return vars_[i];
  throw std::out_of_range("parameter not bound: " + name);
}

GradientSet gradient_of_scalar(Tape& tape, Var loss_root, const Bindings& bound,
                               ParameterStore& params) {
  if (bound.size() != params.size()) {
    throw ContractError("bindings do not match the parameter store");
  }
  tape.backward(loss_root);
  GradientSet out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back(tape.grad(bound.at(i)));
    params.entries()[i].grad = out.back();
  }
  return out;
}

GradientSet finite_difference_gradient(const ScalarObjective& f, const ParameterStore& params,
                                       double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite differences need eps > 0");
  ParameterStore probe = params;
  GradientSet out;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    Matrix& v = probe.entries()[k].value;
    Matrix g(v.rows(), v.cols());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + eps;
      const double up = f(probe);
      v[i] = orig - eps;
      const double down = f(probe);
      v[i] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw OracleError(fmt::format("objective not finite at {}[{}]", probe.entries()[k].name, i));
      }
      g[i] = (up - down) / (2.0 * eps);
    }
    out.push_back(std::move(g));
  }
  return out;
}

double gradient_relative_error(const Matrix& analytic, const Matrix& numeric) {
  return max_abs_diff(analytic, numeric) / std::max(1.0, max_abs(numeric));
}

} // namespace stlgru
