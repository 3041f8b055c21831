#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "stlgru/autodiff.hpp"
#include "stlgru/cell.hpp"
#include "stlgru/matrix.hpp"
#include "stlgru/parameters.hpp"

namespace testing {

using stlgru::Matrix;
using stlgru::Tape;
using stlgru::Var;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

inline Matrix uniform_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo,
                             double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

using OpBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Worst relative error between tape and central-difference gradients of
/// sum(op(inputs) ⊙ R) for a fixed random R.
inline double op_gradient_error(const std::vector<Matrix>& inputs, const OpBuilder& op,
                                std::uint64_t seed = 7, double eps = 1e-5) {
  stlgru::ParameterStore store;
  for (std::size_t i = 0; i < inputs.size(); ++i) store.add("x" + std::to_string(i), inputs[i]);

  Matrix weights;
  {
    Tape t;
    stlgru::Bindings b(t, store);
    std::vector<Var> xs;
    for (std::size_t i = 0; i < b.size(); ++i) xs.push_back(b.at(i));
    const Matrix& out = t.value(op(t, xs));
    std::mt19937_64 rng(seed);
    weights = random_matrix(out.rows(), out.cols(), rng);
  }
  auto build = [&](Tape& t, const stlgru::Bindings& b) {
    std::vector<Var> xs;
    for (std::size_t i = 0; i < b.size(); ++i) xs.push_back(b.at(i));
    return stlgru::ad::sum(t, stlgru::ad::hadamard(t, op(t, xs), t.constant(weights)));
  };
  auto objective = [&](const stlgru::ParameterStore& p) {
    Tape t;
    stlgru::Bindings b(t, p);
    return t.value(build(t, b))[0];
  };
  Tape t;
  stlgru::Bindings b(t, store);
  const auto analytic = stlgru::gradient_of_scalar(t, build(t, b), b, store);
  const auto numeric = stlgru::finite_difference_gradient(objective, store, eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, stlgru::gradient_relative_error(analytic[i], numeric[i]));
  }
  return worst;
}

inline double script_logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Graph convolution written out element by element: degrees, the
/// symmetric normalization with self loops, then Â·X·W.
inline Matrix script_gcn(const Matrix& x, const Matrix& a, const Matrix& w) {
  const std::size_t n = a.rows();
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a(i, j);
  Matrix prop(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double si = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
      const double sj = deg[j] > 0.0 ? 1.0 / std::sqrt(deg[j]) : 0.0;
      prop(i, j) = (i == j ? 1.0 : 0.0) + si * a(i, j) * sj;
    }
  Matrix mixed(n, x.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += prop(i, j) * x(j, c);
      mixed(i, c) = s;
    }
  Matrix out(n, w.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < w.cols(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < w.rows(); ++k) s += mixed(i, k) * w(k, c);
      out(i, c) = s;
    }
  return out;
}

struct ScriptAttention {
  Matrix p;
  Matrix j_z;
};

/// Memory-augmented attention, one scalar at a time: stack [J_r; H], score
/// with ψ, softmax every row over features, gate each half and add.
inline ScriptAttention script_maa(const Matrix& j_r, const Matrix& h, const Matrix& psi) {
  const std::size_t n = j_r.rows(), c = j_r.cols();
  Matrix m(2 * n, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c; ++k) {
      m(i, k) = j_r(i, k);
      m(n + i, k) = h(i, k);
    }
  Matrix p(2 * n, c);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    std::vector<double> s(c, 0.0);
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t l = 0; l < c; ++l) s[k] += m(i, l) * psi(l, k);
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) total += std::exp(s[k]);
    for (std::size_t k = 0; k < c; ++k) p(i, k) = std::exp(s[k]) / total;
  }
  Matrix j_z(n, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c; ++k) {
      const double a_s = p(i, k) * j_r(i, k);
      const double a_t = p(n + i, k) * h(i, k);
      j_z(i, k) = a_s + a_t;
    }
  return {p, j_z};
}

/// Gated update written per entry.
inline Matrix script_gru(const Matrix& x, const Matrix& j_r, const Matrix& j_z, const Matrix& h,
                         const stlgru::CellParams& w) {
  const std::size_t n = h.rows(), c = h.cols();
  auto dot_row = [](const Matrix& a, std::size_t i, const Matrix& b, std::size_t k) {
    double s = 0.0;
    for (std::size_t l = 0; l < a.cols(); ++l) s += a(i, l) * b(l, k);
    return s;
  };
  Matrix out(n, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c; ++k) {
      const double g = script_logistic(dot_row(j_z, i, w.w_z, k) + dot_row(h, i, w.u_z, k));
      const double r = script_logistic(dot_row(j_r, i, w.w_r, k) + dot_row(h, i, w.u_r, k));
      const double cand = std::tanh(dot_row(x, i, w.w_h, k) + r * dot_row(h, i, w.u_h, k));
      out(i, k) = g * h(i, k) + (1.0 - g) * cand;
    }
  return out;
}

inline stlgru::CellParams random_cell(std::size_t c_in, std::size_t c, std::mt19937_64& rng,
                                      double scale = 0.5) {
  stlgru::CellParams p;
  p.proj = random_matrix(c_in, c, rng, scale);
  p.psi = random_matrix(c, c, rng, scale);
  p.w_z = random_matrix(c, c, rng, scale);
  p.u_z = random_matrix(c, c, rng, scale);
  p.w_r = random_matrix(c, c, rng, scale);
  p.u_r = random_matrix(c, c, rng, scale);
  p.w_h = random_matrix(c, c, rng, scale);
  p.u_h = random_matrix(c, c, rng, scale);
  return p;
}

inline Matrix random_symmetric_binary(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution edge(p);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = edge(rng) ? 1.0 : 0.0;
  return a;
}

/// Spectral radius of a symmetric matrix by power iteration on its square.
inline double spectral_radius(const Matrix& m, int iterations = 500) {
  const std::size_t n = m.rows();
  std::vector<double> v(n, 1.0), w(n);
  for (std::size_t i = 0; i < n; ++i) v[i] += 0.01 * static_cast<double>(i);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += m(i, j) * v[j];
        w[i] = s;
      }
      v.swap(w);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = std::sqrt(norm);  // ‖M²v‖ for unit v
    for (double& x : v) x /= norm;
  }
  return lambda;
}

} // namespace testing
