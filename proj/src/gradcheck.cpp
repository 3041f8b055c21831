#include "stlgru/gradcheck.hpp"

#include <algorithm>
#include <random>

#include "stlgru/model.hpp"
#include "stlgru/parameters.hpp"

namespace stlgru {

ModelConfig toy_gradcheck_config() {
  ModelConfig c;
  c.n_nodes = 5;
  c.embed_dim = 3;
  c.hidden_dim = 8;
  c.window = 6;
  c.horizon = 4;
  return c;
}

GradCheckReport run_gradient_check(const ModelConfig& cfg, std::uint64_t seed, double eps,
                                   std::size_t batch) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  Model model(cfg, rng());

  std::normal_distribution<double> normal(0.0, 1.0);
  // Zero biases plus causal zero padding would park ReLU inputs on the kink.
  for (auto& p : model.params().entries()) {
    for (double& v : p.value.values()) v += 0.1 * normal(rng);
  }
  WindowBatch data;
  data.batch = batch;
  const std::size_t rows = batch * cfg.n_nodes;
  for (std::size_t t = 0; t < cfg.window; ++t) {
    Matrix x(rows, cfg.in_channels);
    for (double& v : x.values()) v = normal(rng);
    data.inputs.push_back(std::move(x));
  }
  data.targets = Matrix(rows, cfg.horizon);
  for (double& v : data.targets.values()) v = normal(rng);

  const GraphDraw graph = GraphDraw::relaxed(GumbelNoise::draw(cfg.n_nodes, rng));
  const Matrix h0 = model.initial_hidden(rows, &rng);

  auto objective = [&](const ParameterStore& params) {
    Tape t;
    Bindings bound(t, params);
    const Var y = model.forward(t, bound, data, graph, h0);
    return t.value(ad::loss(t, y, t.constant(data.targets)))[0];
  };

  Tape t;
  Bindings bound(t, model.params());
  const Var l = ad::loss(t, model.forward(t, bound, data, graph, h0), t.constant(data.targets));
  const GradientSet analytic = gradient_of_scalar(t, l, bound, model.params());
  const GradientSet numeric = finite_difference_gradient(objective, model.params(), eps);

  GradCheckReport report;
  report.config = cfg;
  report.loss = t.value(l)[0];
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double err = gradient_relative_error(analytic[k], numeric[k]);
    report.tensors.push_back({model.params().entries()[k].name, analytic[k].size(), err});
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  return report;
}

} // namespace stlgru
