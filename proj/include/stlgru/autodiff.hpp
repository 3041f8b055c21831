#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stlgru/matrix.hpp"

namespace stlgru {

/// Violated calling contract (e.g. backward from a non-scalar root).
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Reverse-mode gradient tape.
///
/// Nodes are appended in evaluation order, so the recorded graph is acyclic
/// and a single reverse sweep visits every node exactly once. A tape belongs
/// to one training step and must not be shared between threads.
class Tape {
public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  /// A value that never receives a gradient (data, frozen noise).
  Var constant(Matrix value);
  /// A differentiable input (a parameter).
  Var leaf(Matrix value);
  /// Records an op result. `backward` runs only if some input needs a gradient.
  Var record(const char* op, Matrix value, std::vector<Var> inputs, BackwardFn backward);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward() root w.r.t. `v`; zeros if unreached.
  const Matrix& grad(Var v);
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
  const char* op_kind(Var v) const { return nodes_.at(v.id).op; }
  std::size_t size() const { return nodes_.size(); }

  /// Accumulates `g` into the gradient slot of `v` (used by backward rules).
  void accumulate(Var v, const Matrix& g);
  /// Gradient slot of node `id`, allocated as zeros on first use.
  Matrix& grad_slot(std::size_t id);
  const std::vector<Var>& inputs(std::size_t id) const { return nodes_[id].inputs; }

  /// Seeds d(root)/d(root) = 1 and sweeps the tape in reverse.
  void backward(Var root);

private:
  struct Node {
    const char* op = "";
    Matrix value;
    Matrix grad;
    std::vector<Var> inputs;
    BackwardFn backward;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

namespace ad {

Var matmul(Tape& t, Var a, Var b);
/// a · bᵀ
Var matmul_nt(Tape& t, Var a, Var b);
Var transpose(Tape& t, Var a);

Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var hadamard(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
/// 1 − a
Var one_minus(Tape& t, Var a);
/// Adds a 1×C row vector to every row of an R×C matrix.
Var add_row_vector(Tape& t, Var a, Var bias);

Var sigmoid(Tape& t, Var a);
Var tanh(Tape& t, Var a);
Var relu(Tape& t, Var a);
/// log(a / (1 − a)); entries must lie strictly inside (0, 1).
Var logit(Tape& t, Var a);

Var row_softmax(Tape& t, Var a);
/// Softmax down each column, separately inside consecutive blocks of `block` rows.
Var block_col_softmax(Tape& t, Var a, std::size_t block);

/// Rows of `top` followed by rows of `bottom`.
Var vstack(Tape& t, Var top, Var bottom);
Var row_slice(Tape& t, Var a, std::size_t begin, std::size_t count);

/// Multiplies every consecutive block of prop.rows() rows of `x` by `prop`.
Var propagate(Tape& t, Var prop, Var x);

/// I + D^(−1/2)·A·D^(−1/2) with D_ii = Σ_j A_ij and D_ii = 0 ⇒ D_ii^(−1/2) = 0.
Var normalize_adjacency(Tape& t, Var a);

/// Mean of squared residuals, as a 1×1 node.
Var mean_squared_error(Tape& t, Var y_hat, Var y_true);
/// Σ a², as a 1×1 node.
Var sum_squares(Tape& t, Var a);
Var sum(Tape& t, Var a);

} // namespace ad
} // namespace stlgru
