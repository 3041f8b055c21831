#pragma once

#include <cstddef>
#include <random>

#include "stlgru/autodiff.hpp"
#include "stlgru/matrix.hpp"

namespace stlgru {

/// Learnable graph: node embeddings E (N×d) and the GCN feature weight (C'×C').
struct GraphParams {
  Matrix embedding;
  Matrix gcn_weight;
};

enum class SampleMode { relaxed, hard };

/// Gumbel(0, 1) draws n¹, n² for every (i, j) pair.
struct GumbelNoise {
  Matrix n1;
  Matrix n2;

  static GumbelNoise draw(std::size_t n, std::mt19937_64& rng);
  /// All-zero noise: the deterministic evaluation graph.
  static GumbelNoise zeros(std::size_t n);
};

struct AdjacencySample {
  Matrix omega;
  Matrix noise1;
  Matrix noise2;
  Matrix adjacency;
  Matrix propagation;
  double temperature = 1.0;
  SampleMode mode = SampleMode::relaxed;
};

/// Ω_ij = logistic((E·Eᵀ)_ij).
Matrix edge_probabilities(const Matrix& embedding);
inline Matrix edge_probabilities(const GraphParams& gp) { return edge_probabilities(gp.embedding); }

/// Binary-Concrete sample A_ij = σ((logit Ω_ij + n¹_ij − n²_ij) / τ). Hard mode
/// thresholds that value at 0.5. Throws std::domain_error if Ω touches 0 or 1.
AdjacencySample sample_adjacency(const Matrix& omega, double tau, const GumbelNoise& noise,
                                 SampleMode mode);
AdjacencySample sample_adjacency(const Matrix& omega, double tau, std::mt19937_64& rng,
                                 SampleMode mode);

/// I + D^(−1/2)·A·D^(−1/2); rows of zero degree contribute nothing off the diagonal.
Matrix normalize_adjacency(const Matrix& a);

/// J_r = (prop · x_t) · w
Matrix gcn_forward(const Matrix& x_t, const Matrix& prop, const Matrix& w);

namespace ad {

/// E·Eᵀ, the logits of Ω.
Var edge_logits(Tape& t, Var embedding);
Var edge_probabilities(Tape& t, Var embedding);
/// Relaxed sample straight from logits, which avoids round-tripping
/// through Ω when Ω saturates in floating point.
Var relaxed_adjacency(Tape& t, Var logits, const GumbelNoise& noise, double tau);
Var gcn_forward(Tape& t, Var x_t, Var prop, Var w);

} // namespace ad
} // namespace stlgru
