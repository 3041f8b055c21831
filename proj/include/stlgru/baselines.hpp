#pragma once

#include <cstddef>
#include <span>

#include "stlgru/autodiff.hpp"
#include "stlgru/config.hpp"
#include "stlgru/matrix.hpp"
#include "stlgru/model.hpp"
#include "stlgru/parameters.hpp"
#include "stlgru/series.hpp"

namespace stlgru {

/// Repeats each node's last observed channel-0 value over the horizon.
Matrix persistence_forecast(const SeriesTensor& window, std::size_t horizon);

/// N×T' forecast of `window` with the given variant. `base` supplies shapes;
/// `params` must have been initialized for configure_baseline(base, kind).
Matrix baseline_forward(const SeriesTensor& window, BaselineKind kind, const ModelConfig& base,
                        const ParameterStore& params, const GraphDraw& graph);

namespace ad {

/// Textbook GRU driven by the graph-convolved input J_r.
Var gcn_gru_encode(Tape& t, const Bindings& p, std::span<const Var> spatial, Var h0);
/// Standard LSTM (with gate biases) over J_r; returns the last hidden state.
Var gcn_lstm_encode(Tape& t, const Bindings& p, std::span<const Var> spatial, Var h0);
/// Two causal width-2 convolutions (dilations 1 and 2) over time; returns the last step.
Var gcn_tcn_encode(Tape& t, const Bindings& p, std::span<const Var> spatial);

} // namespace ad
} // namespace stlgru
