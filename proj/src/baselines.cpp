#include "stlgru/baselines.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace stlgru {

Matrix persistence_forecast(const SeriesTensor& window, std::size_t horizon) {
  if (window.n_steps() == 0) throw std::invalid_argument("persistence_forecast: empty window");
  const std::size_t last = window.n_steps() - 1;
  Matrix out(window.n_nodes(), horizon);
  for (std::size_t i = 0; i < window.n_nodes(); ++i)
    for (std::size_t h = 0; h < horizon; ++h) out(i, h) = window.at(last, i);
  return out;
}

Matrix baseline_forward(const SeriesTensor& window, BaselineKind kind, const ModelConfig& base,
                        const ParameterStore& params, const GraphDraw& graph) {
  const ModelConfig cfg = configure_baseline(base, kind);
  if (cfg.kind == ModelKind::persistence) return persistence_forecast(window, cfg.horizon);
  try {
    return Model(cfg, params).forecast(window, graph);
  } catch (const ConfigError& e) {
    throw ConfigError("params", fmt::format("do not fit {}: {}", to_string(kind), e.what()));
  }
}

namespace ad {

Var gcn_gru_encode(Tape& t, const Bindings& p, std::span<const Var> spatial, Var h0) {
  const Var w_z = p["W_z"], u_z = p["U_z"], w_r = p["W_r"], u_r = p["U_r"], w_h = p["W_h"],
            u_h = p["U_h"];
  Var h = h0;
  for (Var x : spatial) {
    const Var z = sigmoid(t, add(t, matmul(t, x, w_z), matmul(t, h, u_z)));
    const Var r = sigmoid(t, add(t, matmul(t, x, w_r), matmul(t, h, u_r)));
    const Var cand = tanh(t, add(t, matmul(t, x, w_h), hadamard(t, r, matmul(t, h, u_h))));
    h = add(t, hadamard(t, z, h), hadamard(t, one_minus(t, z), cand));
  }
  return h;
}

Var gcn_lstm_encode(Tape& t, const Bindings& p, std::span<const Var> spatial, Var h0) {
  auto gate = [&](const char* g, Var x, Var h) {
    return add_row_vector(t,
                          add(t, matmul(t, x, p[fmt::format("W_{}", g)]),
                              matmul(t, h, p[fmt::format("U_{}", g)])),
                          p[fmt::format("b_{}", g)]);
  };
  Var h = h0;
  Var c = t.constant(Matrix(t.value(h0).rows(), t.value(h0).cols()));
  for (Var x : spatial) {
    const Var i = sigmoid(t, gate("i", x, h));
    const Var f = sigmoid(t, gate("f", x, h));
    const Var o = sigmoid(t, gate("o", x, h));
    const Var cand = tanh(t, gate("c", x, h));
    c = add(t, hadamard(t, f, c), hadamard(t, i, cand));
    h = hadamard(t, o, tanh(t, c));
  }
  return h;
}

Var gcn_tcn_encode(Tape& t, const Bindings& p, std::span<const Var> spatial) {
  std::vector<Var> layer(spatial.begin(), spatial.end());
  std::size_t dilation = 1;
  for (const char* l : {"1", "2"}) {
    const Var k0 = p[fmt::format("K{}_0", l)];
    const Var k1 = p[fmt::format("K{}_1", l)];
    const Var bias = p[fmt::format("c{}", l)];
    std::vector<Var> next;
    next.reserve(layer.size());
    for (std::size_t s = 0; s < layer.size(); ++s) {
      Var y = matmul(t, layer[s], k0);
      // Causal: steps before the window start are zero padding.
      if (s >= dilation) y = add(t, y, matmul(t, layer[s - dilation], k1));
      next.push_back(relu(t, add_row_vector(t, y, bias)));
    }
    layer = std::move(next);
    dilation *= 2;
  }
  return layer.back();
}

} // namespace ad
} // namespace stlgru
