#pragma once

#include <cstddef>

#include "stlgru/autodiff.hpp"
#include "stlgru/config.hpp"
#include "stlgru/matrix.hpp"

namespace stlgru {

/// Input projection, attention kernel and the six gate matrices of one cell.
struct CellParams {
  Matrix proj;  // C_in×C'
  Matrix psi;   // C'×C'
  Matrix w_z, u_z, w_r, u_r, w_h, u_h;
};

/// Intermediate tensors of memory-augmented attention.
struct AttentionContext {
  Matrix m;    // 2N×C'
  Matrix p;    // 2N×C'
  Matrix p_s;  // N×C'
  Matrix p_t;  // N×C'
  Matrix a_s;
  Matrix a_t;
  Matrix j_z;
};

/// X_t = x_raw · proj
Matrix project_input(const Matrix& x_raw, const Matrix& proj);

AttentionContext maa_forward(const Matrix& j_r, const Matrix& h_prev, const Matrix& psi,
                             AttentionAxis axis = AttentionAxis::feature);

/// Synchronized gated update: the update gate reads J_z, the reset gate J_r,
/// and the candidate the projected input X_t.
Matrix gru_update(const Matrix& x_t, const Matrix& j_r, const Matrix& j_z, const Matrix& h_prev,
                  const CellParams& cell);

/// project_input → gcn_forward → maa_forward → gru_update.
Matrix cell_step(const Matrix& x_raw, const Matrix& h_prev, const Matrix& propagation,
                 const Matrix& gcn_weight, const CellParams& cell,
                 AttentionAxis axis = AttentionAxis::feature);

namespace ad {

struct CellVars {
  Var proj, psi, w_z, u_z, w_r, u_r, w_h, u_h;
};

struct AttentionVars {
  Var m, p, p_s, p_t, a_s, a_t, j_z;
};

Var project_input(Tape& t, Var x_raw, Var proj);

/// Works on a stack of windows: j_r and h_prev hold B·n_nodes rows.
AttentionVars maa_forward(Tape& t, Var j_r, Var h_prev, Var psi, AttentionAxis axis,
                          std::size_t n_nodes);

Var gru_update(Tape& t, Var x_t, Var j_r, Var j_z, Var h_prev, const CellVars& cell);

} // namespace ad
} // namespace stlgru
