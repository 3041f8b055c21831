#include "stlgru/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include <fmt/format.h>

#include "stlgru/config.hpp"

namespace stlgru {

void SyntheticSpec::validate() const {
  if (n_nodes < 2) throw ConfigError("n_nodes", "synthetic data needs at least 2 nodes");
  if (n_steps < 2) throw ConfigError("n_steps", "synthetic data needs at least 2 steps");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha", "must lie in [0, 1)");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "must be >= 0");
  if (periods.empty()) throw ConfigError("periods", "need at least one period");
  for (double p : periods)
    if (!(p >= 2.0)) throw ConfigError("periods", fmt::format("period {} is below 2", p));
  if (!(mean_degree > 0.0)) throw ConfigError("mean_degree", "must be > 0");
  if (!(scale > 0.0)) throw ConfigError("scale", "must be > 0");
}

bool is_connected(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  if (n == 0) return true;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (!seen[v] && adjacency(u, v) > 0.0) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
    }
  }
  return count == n;
}

Matrix random_connected_graph(std::size_t n, double mean_degree, std::uint64_t seed,
                              int max_attempts) {
  std::mt19937_64 rng(seed);
  const double p = std::min(1.0, mean_degree / static_cast<double>(n - 1));
  std::bernoulli_distribution edge(p);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (edge(rng)) a(i, j) = a(j, i) = 1.0;
    if (is_connected(a)) return a;
  }
  throw GenerationError(fmt::format(
      "no connected graph on {} nodes with mean degree {} after {} attempts", n, mean_degree,
      max_attempts));
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_nodes;
  SyntheticData out;
  out.adjacency = random_connected_graph(n, spec.mean_degree, spec.graph_seed);

  Matrix walk(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += out.adjacency(i, j);
    for (std::size_t j = 0; j < n; ++j) walk(i, j) = out.adjacency(i, j) / deg;
  }

  std::mt19937_64 rng(spec.signal_seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amplitude(0.5, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t k = spec.periods.size();
  std::vector<double> phases(n * k), amps(n * k);
  for (std::size_t i = 0; i < n * k; ++i) {
    phases[i] = phase(rng);
    amps[i] = amplitude(rng);
  }
  auto base = [&](std::size_t t, std::size_t i) {
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double w = 2.0 * std::numbers::pi / spec.periods[p];
      s += amps[i * k + p] * std::sin(w * static_cast<double>(t) + phases[i * k + p]);
    }
    return s;
  };

  std::vector<double> x(n), next(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = base(0, i);
  out.series = SeriesTensor(n, spec.n_steps, 1);
  for (std::size_t t = 0; t < spec.n_steps; ++t) {
    if (t > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        double mix = 0.0;
        for (std::size_t j = 0; j < n; ++j) mix += walk(i, j) * x[j];
        const double eps = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(rng) : 0.0;
        next[i] = (1.0 - spec.alpha) * base(t, i) + spec.alpha * mix + eps;
      }
      x.swap(next);
    }
    for (std::size_t i = 0; i < n; ++i) out.series.at(t, i) = spec.level + spec.scale * x[i];
  }
  return out;
}

} // namespace stlgru
