#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stlgru/matrix.hpp"
#include "stlgru/series.hpp"

namespace stlgru {

/// Recipe for a desk-scale spatio-temporal dataset with a known graph.
struct SyntheticSpec {
  std::size_t n_nodes = 20;
  std::size_t n_steps = 2400;
  std::uint64_t graph_seed = 1;
  std::uint64_t signal_seed = 2;
  /// Weight of the neighbour average in each update, in [0, 1).
  double alpha = 0.3;
  double noise_sigma = 0.1;
  std::vector<double> periods{24.0, 60.0};
  double mean_degree = 3.0;
  /// Flow = level + scale · signal.
  double level = 250.0;
  double scale = 80.0;

  void validate() const;
};

struct SyntheticData {
  SeriesTensor series;
  /// Ground-truth symmetric 0/1 adjacency without self loops.
  Matrix adjacency;
};

class GenerationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Random connected graph, per-node sinusoids with random phases, and
/// neighbour diffusion:
///   x_{t+1} = (1 − α)·base_{t+1} + α·W·x_t + ε_t,  ε ~ N(0, σ²)
/// where W is the row-normalized adjacency.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Erdos-Renyi graph resampled until connected.
Matrix random_connected_graph(std::size_t n, double mean_degree, std::uint64_t seed,
                              int max_attempts = 200);

bool is_connected(const Matrix& adjacency);

} // namespace stlgru
