#include "stlgru/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace stlgru {

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{"constant", std::move(value), {}, {}, {}, false});
  return Var{nodes_.size() - 1};
}

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{"leaf", std::move(value), {}, {}, {}, true});
  return Var{nodes_.size() - 1};
}

Var Tape::record(const char* op, Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (Var v : inputs) needs = needs || nodes_.at(v.id).needs_grad;
  nodes_.push_back(Node{op, std::move(value), {}, std::move(inputs),
                        needs ? std::move(backward) : BackwardFn{}, needs});
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_.at(id);
  if (!n.grad.same_shape(n.value)) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

const Matrix& Tape::grad(Var v) { return grad_slot(v.id); }

void Tape::accumulate(Var v, const Matrix& g) {
  if (!nodes_.at(v.id).needs_grad) return;
  grad_slot(v.id) += g;
}

void Tape::backward(Var root) {
  const Node& r = nodes_.at(root.id);
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw ContractError(
        fmt::format("backward root must be a scalar, got {}", r.value.shape_str()));
  }
  for (Node& n : nodes_) n.grad = Matrix();
  grad_slot(root.id)[0] = 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backward || !n.grad.same_shape(n.value)) continue;
    n.backward(*this, id);
  }
}

namespace ad {
namespace {

bool wants(const Tape& t, Var v) { return t.needs_grad(v); }

template <typename F>
Var unary_map(Tape& t, const char* op, Var a, F forward_and_derivative) {
  const Matrix& x = t.value(a);
  Matrix y(x.rows(), x.cols());
  Matrix dydx(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [v, d] = forward_and_derivative(x[i]);
    y[i] = v;
    dydx[i] = d;
  }
  return t.record(op, std::move(y), {a},
                  [a, dydx = std::move(dydx)](Tape& tp, std::size_t self) {
                    tp.accumulate(a, hadamard(tp.grad_slot(self), dydx));
                  });
}

} // namespace

Var matmul(Tape& t, Var a, Var b) {
  return t.record("matmul", stlgru::matmul(t.value(a), t.value(b)), {a, b},
                  [a, b](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    if (wants(tp, a)) tp.accumulate(a, matmul_nt(g, tp.value(b)));
                    if (wants(tp, b)) tp.accumulate(b, matmul_tn(tp.value(a), g));
                  });
}

Var matmul_nt(Tape& t, Var a, Var b) {
  return t.record("matmul_nt", stlgru::matmul_nt(t.value(a), t.value(b)), {a, b},
                  [a, b](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    // C = A·Bᵀ: dA = G·B, dB = Gᵀ·A
                    if (wants(tp, a)) tp.accumulate(a, stlgru::matmul(g, tp.value(b)));
                    if (wants(tp, b)) tp.accumulate(b, matmul_tn(g, tp.value(a)));
                  });
}

Var transpose(Tape& t, Var a) {
  return t.record("transpose", stlgru::transpose(t.value(a)), {a},
                  [a](Tape& tp, std::size_t self) {
                    tp.accumulate(a, stlgru::transpose(tp.grad_slot(self)));
                  });
}

Var add(Tape& t, Var a, Var b) {
  return t.record("add", stlgru::add(t.value(a), t.value(b)), {a, b},
                  [a, b](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    tp.accumulate(a, g);
                    tp.accumulate(b, g);
                  });
}

Var sub(Tape& t, Var a, Var b) {
  return t.record("sub", stlgru::sub(t.value(a), t.value(b)), {a, b},
                  [a, b](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    tp.accumulate(a, g);
                    if (wants(tp, b)) tp.accumulate(b, stlgru::scale(g, -1.0));
                  });
}

Var hadamard(Tape& t, Var a, Var b) {
  return t.record("hadamard", stlgru::hadamard(t.value(a), t.value(b)), {a, b},
                  [a, b](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    if (wants(tp, a)) tp.accumulate(a, stlgru::hadamard(g, tp.value(b)));
                    if (wants(tp, b)) tp.accumulate(b, stlgru::hadamard(g, tp.value(a)));
                  });
}

Var scale(Tape& t, Var a, double s) {
  return t.record("scale", stlgru::scale(t.value(a), s), {a},
                  [a, s](Tape& tp, std::size_t self) {
                    tp.accumulate(a, stlgru::scale(tp.grad_slot(self), s));
                  });
}

Var one_minus(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 - x[i];
  return t.record("one_minus", std::move(y), {a}, [a](Tape& tp, std::size_t self) {
    tp.accumulate(a, stlgru::scale(tp.grad_slot(self), -1.0));
  });
}

Var add_row_vector(Tape& t, Var a, Var bias) {
  const Matrix& x = t.value(a);
  const Matrix& b = t.value(bias);
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw ShapeError(fmt::format("add_row_vector: bias {} does not fit {}", b.shape_str(),
                                 x.shape_str()));
  }
  Matrix y = x;
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += b[c];
  return t.record("add_row_vector", std::move(y), {a, bias},
                  [a, bias](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    tp.accumulate(a, g);
                    if (!wants(tp, bias)) return;
                    Matrix gb(1, g.cols());
                    for (std::size_t r = 0; r < g.rows(); ++r)
                      for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
                    tp.accumulate(bias, gb);
                  });
}

Var sigmoid(Tape& t, Var a) {
  return unary_map(t, "sigmoid", a, [](double x) {
    const double s = logistic(x);
    return std::pair{s, s * (1.0 - s)};
  });
}

Var tanh(Tape& t, Var a) {
  return unary_map(t, "tanh", a, [](double x) {
    const double v = std::tanh(x);
    return std::pair{v, 1.0 - v * v};
  });
}

Var relu(Tape& t, Var a) {
  return unary_map(t, "relu", a, [](double x) {
    return x > 0.0 ? std::pair{x, 1.0} : std::pair{0.0, 0.0};
  });
}

Var logit(Tape& t, Var a) {
  for (double v : t.value(a).values()) {
    if (!(v > 0.0 && v < 1.0)) {
      throw std::domain_error(fmt::format("logit: argument {} outside (0, 1)", v));
    }
  }
  return unary_map(t, "logit", a, [](double x) {
    return std::pair{std::log(x / (1.0 - x)), 1.0 / (x * (1.0 - x))};
  });
}

Var row_softmax(Tape& t, Var a) {
  return t.record("row_softmax", stlgru::row_softmax(t.value(a)), {a},
                  [a](Tape& tp, std::size_t self) {
                    const Matrix& y = tp.value(Var{self});
                    const Matrix& g = tp.grad_slot(self);
                    Matrix dx(y.rows(), y.cols());
                    for (std::size_t r = 0; r < y.rows(); ++r) {
                      double dot = 0.0;
                      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
                      for (std::size_t c = 0; c < y.cols(); ++c)
                        dx(r, c) = y(r, c) * (g(r, c) - dot);
                    }
                    tp.accumulate(a, dx);
                  });
}

Var block_col_softmax(Tape& t, Var a, std::size_t block) {
  const Matrix& x = t.value(a);
  if (block == 0 || x.rows() % block != 0) {
    throw ShapeError(fmt::format("block_col_softmax: {} rows not divisible into blocks of {}",
                                 x.rows(), block));
  }
  Matrix y(x.rows(), x.cols());
  for (std::size_t b0 = 0; b0 < x.rows(); b0 += block) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double mx = x(b0, c);
      for (std::size_t r = b0; r < b0 + block; ++r) mx = std::max(mx, x(r, c));
      double total = 0.0;
      for (std::size_t r = b0; r < b0 + block; ++r) {
        y(r, c) = std::exp(x(r, c) - mx);
        total += y(r, c);
      }
      for (std::size_t r = b0; r < b0 + block; ++r) y(r, c) /= total;
    }
  }
  return t.record("block_col_softmax", std::move(y), {a},
                  [a, block](Tape& tp, std::size_t self) {
                    const Matrix& y = tp.value(Var{self});
                    const Matrix& g = tp.grad_slot(self);
                    Matrix dx(y.rows(), y.cols());
                    for (std::size_t b0 = 0; b0 < y.rows(); b0 += block) {
                      for (std::size_t c = 0; c < y.cols(); ++c) {
                        double dot = 0.0;
                        for (std::size_t r = b0; r < b0 + block; ++r) dot += g(r, c) * y(r, c);
                        for (std::size_t r = b0; r < b0 + block; ++r)
                          dx(r, c) = y(r, c) * (g(r, c) - dot);
                      }
                    }
                    tp.accumulate(a, dx);
                  });
}

Var vstack(Tape& t, Var top, Var bottom) {
  const Matrix& a = t.value(top);
  const Matrix& b = t.value(bottom);
  if (a.cols() != b.cols()) {
    throw ShapeError(fmt::format("vstack: {} over {}", a.shape_str(), b.shape_str()));
  }
  Matrix y(a.rows() + b.rows(), a.cols());
  std::copy(a.values().begin(), a.values().end(), y.values().begin());
  std::copy(b.values().begin(), b.values().end(), y.values().begin() + a.size());
  const std::size_t split = a.size();
  return t.record("vstack", std::move(y), {top, bottom},
                  [top, bottom, split](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    const Matrix& a = tp.value(top);
                    const Matrix& b = tp.value(bottom);
                    if (wants(tp, top)) {
                      Matrix ga(a.rows(), a.cols());
                      std::copy_n(g.values().begin(), split, ga.values().begin());
                      tp.accumulate(top, ga);
                    }
                    if (wants(tp, bottom)) {
                      Matrix gb(b.rows(), b.cols());
                      std::copy(g.values().begin() + split, g.values().end(), gb.values().begin());
                      tp.accumulate(bottom, gb);
                    }
                  });
}

Var row_slice(Tape& t, Var a, std::size_t begin, std::size_t count) {
  const Matrix& x = t.value(a);
  if (begin + count > x.rows()) {
    throw ShapeError(fmt::format("row_slice: rows [{}, {}) outside {}", begin, begin + count,
                                 x.shape_str()));
  }
  Matrix y(count, x.cols());
  const auto first = x.values().begin() + begin * x.cols();
  std::copy(first, first + count * x.cols(), y.values().begin());
  return t.record("row_slice", std::move(y), {a}, [a, begin](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_slot(self);
    const Matrix& x = tp.value(a);
    Matrix gx(x.rows(), x.cols());
    std::copy(g.values().begin(), g.values().end(), gx.values().begin() + begin * x.cols());
    tp.accumulate(a, gx);
  });
}

Var propagate(Tape& t, Var prop, Var x) {
  const Matrix& p = t.value(prop);
  const Matrix& xv = t.value(x);
  const std::size_t n = p.rows();
  if (p.cols() != n || n == 0 || xv.rows() % n != 0) {
    throw ShapeError(
        fmt::format("propagate: operator {} cannot act on {}", p.shape_str(), xv.shape_str()));
  }
  const std::size_t c = xv.cols();
  const std::size_t blocks = xv.rows() / n;
  Matrix y(xv.rows(), c);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      double* out = y.row(b * n + i).data();
      for (std::size_t j = 0; j < n; ++j) {
        const double pij = p(i, j);
        if (pij == 0.0) continue;
        const double* in = xv.row(b * n + j).data();
        for (std::size_t k = 0; k < c; ++k) out[k] += pij * in[k];
      }
    }
  }
  return t.record("propagate", std::move(y), {prop, x},
                  [prop, x, n, c, blocks](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    const Matrix& p = tp.value(prop);
                    const Matrix& xv = tp.value(x);
                    if (wants(tp, prop)) {
                      Matrix gp(n, n);
                      for (std::size_t b = 0; b < blocks; ++b)
                        for (std::size_t i = 0; i < n; ++i)
                          for (std::size_t j = 0; j < n; ++j) {
                            double s = 0.0;
                            const double* gi = g.row(b * n + i).data();
                            const double* xj = xv.row(b * n + j).data();
                            for (std::size_t k = 0; k < c; ++k) s += gi[k] * xj[k];
                            gp(i, j) += s;
                          }
                      tp.accumulate(prop, gp);
                    }
                    if (wants(tp, x)) {
                      Matrix gx(xv.rows(), c);
                      for (std::size_t b = 0; b < blocks; ++b)
                        for (std::size_t i = 0; i < n; ++i) {
                          const double* gi = g.row(b * n + i).data();
                          for (std::size_t j = 0; j < n; ++j) {
                            const double pij = p(i, j);
                            if (pij == 0.0) continue;
                            double* out = gx.row(b * n + j).data();
                            for (std::size_t k = 0; k < c; ++k) out[k] += pij * gi[k];
                          }
                        }
                      tp.accumulate(x, gx);
                    }
                  });
}

Var normalize_adjacency(Tape& t, Var a) {
  const Matrix& av = t.value(a);
  const std::size_t n = av.rows();
  if (av.cols() != n) {
    throw ShapeError(fmt::format("normalize_adjacency: {} is not square", av.shape_str()));
  }
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += av(i, j);
    inv_sqrt[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Matrix y = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y(i, j) += inv_sqrt[i] * av(i, j) * inv_sqrt[j];
  return t.record(
      "normalize_adjacency", std::move(y), {a},
      [a, n, s = std::move(inv_sqrt)](Tape& tp, std::size_t self) {
        const Matrix& g = tp.grad_slot(self);
        const Matrix& av = tp.value(a);
        // ds_i collects every path through s_i = deg_i^(-1/2).
        std::vector<double> ds(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            ds[i] += g(i, j) * av(i, j) * s[j];
            ds[j] += g(i, j) * s[i] * av(i, j);
          }
        Matrix ga(n, n);
        for (std::size_t i = 0; i < n; ++i) {
          const double ddeg = -0.5 * s[i] * s[i] * s[i] * ds[i];
          for (std::size_t j = 0; j < n; ++j) ga(i, j) = g(i, j) * s[i] * s[j] + ddeg;
        }
        tp.accumulate(a, ga);
      });
}

Var mean_squared_error(Tape& t, Var y_hat, Var y_true) {
  const Matrix& p = t.value(y_hat);
  const Matrix& q = t.value(y_true);
  require_same_shape(p, q, "mean_squared_error");
  if (p.empty()) throw ShapeError("mean_squared_error: empty operands");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  const double inv_n = 1.0 / static_cast<double>(p.size());
  return t.record("mean_squared_error", Matrix(1, 1, s * inv_n), {y_hat, y_true},
                  [y_hat, y_true, inv_n](Tape& tp, std::size_t self) {
                    const double g = tp.grad_slot(self)[0];
                    Matrix r = stlgru::sub(tp.value(y_hat), tp.value(y_true));
                    r *= 2.0 * inv_n * g;
                    if (wants(tp, y_hat)) tp.accumulate(y_hat, r);
                    if (wants(tp, y_true)) tp.accumulate(y_true, stlgru::scale(r, -1.0));
                  });
}

Var sum_squares(Tape& t, Var a) {
  double s = 0.0;
  for (double v : t.value(a).values()) s += v * v;
  return t.record("sum_squares", Matrix(1, 1, s), {a}, [a](Tape& tp, std::size_t self) {
    tp.accumulate(a, stlgru::scale(tp.value(a), 2.0 * tp.grad_slot(self)[0]));
  });
}

Var sum(Tape& t, Var a) {
  double s = 0.0;
  for (double v : t.value(a).values()) s += v;
  return t.record("sum", Matrix(1, 1, s), {a}, [a](Tape& tp, std::size_t self) {
    const Matrix& x = tp.value(a);
    tp.accumulate(a, Matrix(x.rows(), x.cols(), tp.grad_slot(self)[0]));
  });
}

} // namespace ad
} // namespace stlgru
