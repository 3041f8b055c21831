#include "stlgru/cell.hpp"

#include <fmt/format.h>

#include "stlgru/graph_learner.hpp"

namespace stlgru {
namespace {

ad::CellVars bind_constants(Tape& t, const CellParams& c) {
  return {t.constant(c.proj), t.constant(c.psi), t.constant(c.w_z), t.constant(c.u_z),
          t.constant(c.w_r),  t.constant(c.u_r), t.constant(c.w_h), t.constant(c.u_h)};
}

} // namespace

Matrix project_input(const Matrix& x_raw, const Matrix& proj) {
  Tape t;
  return t.value(ad::project_input(t, t.constant(x_raw), t.constant(proj)));
}

AttentionContext maa_forward(const Matrix& j_r, const Matrix& h_prev, const Matrix& psi,
                             AttentionAxis axis) {
  Tape t;
  const auto v =
      ad::maa_forward(t, t.constant(j_r), t.constant(h_prev), t.constant(psi), axis, j_r.rows());
  return {t.value(v.m),   t.value(v.p),   t.value(v.p_s), t.value(v.p_t),
          t.value(v.a_s), t.value(v.a_t), t.value(v.j_z)};
}

Matrix gru_update(const Matrix& x_t, const Matrix& j_r, const Matrix& j_z, const Matrix& h_prev,
                  const CellParams& cell) {
  Tape t;
  const auto c = bind_constants(t, cell);
  return t.value(ad::gru_update(t, t.constant(x_t), t.constant(j_r), t.constant(j_z),
                                t.constant(h_prev), c));
}

Matrix cell_step(const Matrix& x_raw, const Matrix& h_prev, const Matrix& propagation,
                 const Matrix& gcn_weight, const CellParams& cell, AttentionAxis axis) {
  Tape t;
  const auto c = bind_constants(t, cell);
  const Var h = t.constant(h_prev);
  const Var x = ad::project_input(t, t.constant(x_raw), c.proj);
  const Var j_r = ad::gcn_forward(t, x, t.constant(propagation), t.constant(gcn_weight));
  const auto att = ad::maa_forward(t, j_r, h, c.psi, axis, propagation.rows());
  return t.value(ad::gru_update(t, x, j_r, att.j_z, h, c));
}

namespace ad {

Var project_input(Tape& t, Var x_raw, Var proj) { return matmul(t, x_raw, proj); }

AttentionVars maa_forward(Tape& t, Var j_r, Var h_prev, Var psi, AttentionAxis axis,
                          std::size_t n_nodes) {
  const Matrix& jr = t.value(j_r);
  const Matrix& h = t.value(h_prev);
  if (!jr.same_shape(h)) {
    throw ShapeError(
        fmt::format("maa_forward: J_r {} and H {} differ", jr.shape_str(), h.shape_str()));
  }
  const std::size_t rows = jr.rows();
  AttentionVars v;
  v.m = vstack(t, j_r, h_prev);
  const Var scores = matmul(t, v.m, psi);
  v.p = axis == AttentionAxis::feature ? row_softmax(t, scores)
                                       : block_col_softmax(t, scores, n_nodes);
  v.p_s = row_slice(t, v.p, 0, rows);
  v.p_t = row_slice(t, v.p, rows, rows);
  v.a_s = hadamard(t, v.p_s, j_r);
  v.a_t = hadamard(t, v.p_t, h_prev);
  v.j_z = add(t, v.a_s, v.a_t);
  return v;
}

Var gru_update(Tape& t, Var x_t, Var j_r, Var j_z, Var h_prev, const CellVars& c) {
  const Var g = sigmoid(t, add(t, matmul(t, j_z, c.w_z), matmul(t, h_prev, c.u_z)));
  const Var r = sigmoid(t, add(t, matmul(t, j_r, c.w_r), matmul(t, h_prev, c.u_r)));
  const Var h_tilde =
      tanh(t, add(t, matmul(t, x_t, c.w_h), hadamard(t, r, matmul(t, h_prev, c.u_h))));
  return add(t, hadamard(t, g, h_prev), hadamard(t, one_minus(t, g), h_tilde));
}

} // namespace ad
} // namespace stlgru
