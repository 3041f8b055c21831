#include "stlgru/graph_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace stlgru {

GumbelNoise GumbelNoise::draw(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto gumbel = [&] {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    return -std::log(-std::log(u));
  };
  GumbelNoise g{Matrix(n, n), Matrix(n, n)};
  for (std::size_t i = 0; i < n * n; ++i) {
    g.n1[i] = gumbel();
    g.n2[i] = gumbel();
  }
  return g;
}

GumbelNoise GumbelNoise::zeros(std::size_t n) { return {Matrix(n, n), Matrix(n, n)}; }

Matrix edge_probabilities(const Matrix& embedding) {
  Tape t;
  return t.value(ad::edge_probabilities(t, t.constant(embedding)));
}

AdjacencySample sample_adjacency(const Matrix& omega, double tau, const GumbelNoise& noise,
                                 SampleMode mode) {
  if (!(tau > 0.0)) throw std::invalid_argument("sample_adjacency: temperature must be > 0");
  if (omega.rows() != omega.cols()) {
    throw ShapeError("sample_adjacency: Ω must be square, got " + omega.shape_str());
  }
  require_same_shape(omega, noise.n1, "sample_adjacency noise");
  require_same_shape(omega, noise.n2, "sample_adjacency noise");

  Tape t;
  const Var logits = ad::logit(t, t.constant(omega));
  Matrix a = t.value(ad::relaxed_adjacency(t, logits, noise, tau));
  if (mode == SampleMode::hard) {
    for (double& v : a.values()) v = v >= 0.5 ? 1.0 : 0.0;
  }
  Matrix prop = normalize_adjacency(a);
  return AdjacencySample{omega, noise.n1, noise.n2, std::move(a), std::move(prop), tau, mode};
}

AdjacencySample sample_adjacency(const Matrix& omega, double tau, std::mt19937_64& rng,
                                 SampleMode mode) {
  return sample_adjacency(omega, tau, GumbelNoise::draw(omega.rows(), rng), mode);
}

Matrix normalize_adjacency(const Matrix& a) {
  Tape t;
  return t.value(ad::normalize_adjacency(t, t.constant(a)));
}

Matrix gcn_forward(const Matrix& x_t, const Matrix& prop, const Matrix& w) {
  Tape t;
  return t.value(ad::gcn_forward(t, t.constant(x_t), t.constant(prop), t.constant(w)));
}

namespace ad {

Var edge_logits(Tape& t, Var embedding) { return matmul_nt(t, embedding, embedding); }

Var edge_probabilities(Tape& t, Var embedding) {
  // Keeps Ω strictly inside (0,1) where the logistic rounds to 0 or 1 in
  // double precision; the true slope there is below 1e-16 anyway.
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  const Var logits = edge_logits(t, embedding);
  const Matrix& l = t.value(logits);
  Matrix omega(l.rows(), l.cols());
  Matrix slope(l.rows(), l.cols());
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double s = logistic(l[i]);
    omega[i] = std::clamp(s, lo, hi);
    slope[i] = omega[i] == s ? s * (1.0 - s) : 0.0;
  }
  return t.record("edge_probabilities", std::move(omega), {logits},
                  [logits, slope = std::move(slope)](Tape& tp, std::size_t self) {
                    tp.accumulate(logits, hadamard(tp.grad_slot(self), slope));
                  });
}

Var relaxed_adjacency(Tape& t, Var logits, const GumbelNoise& noise, double tau) {
  const Var perturbed = add(t, logits, t.constant(stlgru::sub(noise.n1, noise.n2)));
  return sigmoid(t, scale(t, perturbed, 1.0 / tau));
}

Var gcn_forward(Tape& t, Var x_t, Var prop, Var w) {
  const Matrix& p = t.value(prop);
  const Matrix& x = t.value(x_t);
  if (p.rows() != p.cols() || x.rows() % p.rows() != 0) {
    throw ShapeError(fmt::format("gcn_forward: propagation {} does not match features {}",
                                 p.shape_str(), x.shape_str()));
  }
  return matmul(t, propagate(t, prop, x_t), w);
}

} // namespace ad
} // namespace stlgru
