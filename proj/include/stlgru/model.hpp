#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "stlgru/autodiff.hpp"
#include "stlgru/config.hpp"
#include "stlgru/graph_learner.hpp"
#include "stlgru/matrix.hpp"
#include "stlgru/parameters.hpp"
#include "stlgru/series.hpp"

namespace stlgru {

/// How the adjacency is realized for one forward pass.
struct GraphDraw {
  SampleMode mode = SampleMode::hard;
  GumbelNoise noise;
  /// Bypasses the graph learner entirely (tests and diagnostics).
  std::optional<Matrix> fixed_propagation;

  /// Relaxed sample with the given (fresh or frozen) noise.
  static GraphDraw relaxed(GumbelNoise noise);
  /// Deterministic hard threshold with zero noise.
  static GraphDraw evaluation(std::size_t n_nodes);
};

/// B windows stacked node-wise: inputs[t] holds B·N rows of C_in values and
/// targets holds B·N rows of T' values.
struct WindowBatch {
  std::size_t batch = 0;
  std::vector<Matrix> inputs;
  Matrix targets;
};

/// Builds a batch from windows starting at `starts`; each spans window + horizon
/// steps (targets are channel 0 of the horizon steps).
WindowBatch make_batch(const SeriesTensor& series, std::span<const std::size_t> starts,
                       std::size_t window, std::size_t horizon);
/// A batch of one input-only window (N×T×C_in).
WindowBatch make_input_batch(const SeriesTensor& window);

/// Uniform ±1/√C' weights, zero biases, E ~ N(0, 1)/√d.
ParameterStore init_parameters(const ModelConfig& cfg, std::mt19937_64& rng);

class Model {
public:
  Model(ModelConfig cfg, std::uint64_t seed);
  /// Adopts trained parameters; names and shapes must match the config.
  Model(ModelConfig cfg, ParameterStore params);

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  /// Propagation operator Â for this draw, recorded on the tape.
  Var propagation(Tape& t, const Bindings& p, const GraphDraw& graph) const;
  AdjacencySample adjacency(const GraphDraw& graph) const;

  /// H_0 for `rows` stacked nodes; gaussian init draws from `rng`.
  Matrix initial_hidden(std::size_t rows, std::mt19937_64* rng) const;

  /// Records the sequential loop and output head; returns B·N × T'.
  Var forward(Tape& t, const Bindings& p, const WindowBatch& batch, const GraphDraw& graph,
              const Matrix& h0) const;

  Matrix forecast(const WindowBatch& batch, const GraphDraw& graph,
                  std::mt19937_64* rng = nullptr) const;
  /// N×T' prediction (normalized units) for one N×T×C_in window.
  Matrix forecast(const SeriesTensor& window, const GraphDraw& graph,
                  std::mt19937_64* rng = nullptr) const;

private:
  ModelConfig cfg_;
  ParameterStore params_;
};

/// Mean squared residual over every element.
double loss(const Matrix& y_hat, const Matrix& y_true);

namespace ad {
inline Var loss(Tape& t, Var y_hat, Var y_true) { return mean_squared_error(t, y_hat, y_true); }
} // namespace ad

} // namespace stlgru
