#include "stlgru/model.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "stlgru/baselines.hpp"
#include "stlgru/cell.hpp"

namespace stlgru {
namespace {

enum class Init { weight, bias, embedding };

struct TensorSpec {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  Init init;
};

std::vector<TensorSpec> layout(const ModelConfig& cfg) {
  const std::size_t c = cfg.hidden_dim;
  std::vector<TensorSpec> out{
      {"E", cfg.n_nodes, cfg.embed_dim, Init::embedding},
      {"W_gcn", c, c, Init::weight},
      {"proj", cfg.in_channels, c, Init::weight},
  };
  auto gates = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) out.push_back({n, c, c, Init::weight});
  };
  switch (cfg.kind) {
  case ModelKind::stlgru:
    if (cfg.use_maa) out.push_back({"psi", c, c, Init::weight});
    gates({"W_z", "U_z", "W_r", "U_r", "W_h", "U_h"});
    break;
  case ModelKind::gcn_gru: gates({"W_z", "U_z", "W_r", "U_r", "W_h", "U_h"}); break;
  case ModelKind::gcn_lstm:
    for (const char* g : {"i", "f", "o", "c"}) {
      out.push_back({fmt::format("W_{}", g), c, c, Init::weight});
      out.push_back({fmt::format("U_{}", g), c, c, Init::weight});
      out.push_back({fmt::format("b_{}", g), 1, c, Init::bias});
    }
    break;
  case ModelKind::gcn_tcn:
    for (const char* l : {"1", "2"}) {
      out.push_back({fmt::format("K{}_0", l), c, c, Init::weight});
      out.push_back({fmt::format("K{}_1", l), c, c, Init::weight});
      out.push_back({fmt::format("c{}", l), 1, c, Init::bias});
    }
    break;
  case ModelKind::persistence: return {};
  }
  out.push_back({"W1", c, c, Init::weight});
  out.push_back({"b1", 1, c, Init::bias});
  out.push_back({"W2", c, cfg.horizon, Init::weight});
  out.push_back({"b2", 1, cfg.horizon, Init::bias});
  return out;
}

} // namespace

GraphDraw GraphDraw::relaxed(GumbelNoise noise) {
  return GraphDraw{SampleMode::relaxed, std::move(noise), std::nullopt};
}

GraphDraw GraphDraw::evaluation(std::size_t n_nodes) {
  return GraphDraw{SampleMode::hard, GumbelNoise::zeros(n_nodes), std::nullopt};
}

WindowBatch make_batch(const SeriesTensor& series, std::span<const std::size_t> starts,
                       std::size_t window, std::size_t horizon) {
  const std::size_t n = series.n_nodes();
  const std::size_t ch = series.n_channels();
  WindowBatch b;
  b.batch = starts.size();
  b.inputs.assign(window, Matrix(b.batch * n, ch));
  b.targets = Matrix(b.batch * n, horizon);
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const std::size_t s = starts[w];
    if (s + window + horizon > series.n_steps()) {
      throw std::out_of_range(fmt::format("window at step {} runs past the series end ({})", s,
                                          series.n_steps()));
    }
    for (std::size_t t = 0; t < window; ++t)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < ch; ++c) b.inputs[t](w * n + i, c) = series.at(s + t, i, c);
    for (std::size_t h = 0; h < horizon; ++h)
      for (std::size_t i = 0; i < n; ++i) b.targets(w * n + i, h) = series.at(s + window + h, i);
  }
  return b;
}

WindowBatch make_input_batch(const SeriesTensor& window) {
  const std::size_t n = window.n_nodes();
  WindowBatch b;
  b.batch = 1;
  b.inputs.assign(window.n_steps(), Matrix(n, window.n_channels()));
  for (std::size_t t = 0; t < window.n_steps(); ++t)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < window.n_channels(); ++c) b.inputs[t](i, c) = window.at(t, i, c);
  return b;
}

ParameterStore init_parameters(const ModelConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
  std::uniform_real_distribution<double> weight(-bound, bound);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double embed_scale = 1.0 / std::sqrt(static_cast<double>(cfg.embed_dim));
  ParameterStore store;
  for (const auto& spec : layout(cfg)) {
    Matrix m(spec.rows, spec.cols);
    for (double& v : m.values()) {
      switch (spec.init) {
      case Init::weight: v = weight(rng); break;
      case Init::bias: v = 0.0; break;
      case Init::embedding: v = normal(rng) * embed_scale; break;
      }
    }
    store.add(spec.name, std::move(m));
  }
  return store;
}

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  std::mt19937_64 rng(seed);
  params_ = init_parameters(cfg_, rng);
}

Model::Model(ModelConfig cfg, ParameterStore params)
    : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  const auto expected = layout(cfg_);
  if (expected.size() != params_.size()) {
    throw ConfigError("parameters", fmt::format("expected {} tensors for {}, got {}",
                                                expected.size(), to_string(cfg_.kind),
                                                params_.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& p = params_.entries()[i];
    if (p.name != expected[i].name || p.value.rows() != expected[i].rows ||
        p.value.cols() != expected[i].cols) {
      throw ConfigError("parameters",
                        fmt::format("tensor {} is {} {}, expected {} {}x{}", i, p.name,
                                    p.value.shape_str(), expected[i].name, expected[i].rows,
                                    expected[i].cols));
    }
  }
}

Var Model::propagation(Tape& t, const Bindings& p, const GraphDraw& graph) const {
  if (graph.fixed_propagation) return t.constant(*graph.fixed_propagation);
  const Var logits = ad::edge_logits(t, p["E"]);
  if (!cfg_.use_gumbel) {
    // Dense graph straight from the embeddings.
    return ad::normalize_adjacency(t, ad::row_softmax(t, logits));
  }
  if (graph.mode == SampleMode::relaxed) {
    return ad::normalize_adjacency(t, ad::relaxed_adjacency(t, logits, graph.noise, cfg_.tau));
  }
  Tape scratch;
  Matrix a = scratch.value(ad::relaxed_adjacency(scratch, scratch.constant(t.value(logits)),
                                                 graph.noise, cfg_.tau));
  for (double& v : a.values()) v = v >= 0.5 ? 1.0 : 0.0;
  return t.constant(stlgru::normalize_adjacency(a));
}

AdjacencySample Model::adjacency(const GraphDraw& graph) const {
  Tape t;
  Bindings p(t, params_);
  AdjacencySample s;
  s.temperature = cfg_.tau;
  s.mode = graph.mode;
  s.noise1 = graph.noise.n1;
  s.noise2 = graph.noise.n2;
  const Var logits = ad::edge_logits(t, p["E"]);
  s.omega = t.value(ad::sigmoid(t, logits));
  if (!cfg_.use_gumbel) {
    s.adjacency = t.value(ad::row_softmax(t, logits));
  } else {
    s.adjacency = t.value(ad::relaxed_adjacency(t, logits, graph.noise, cfg_.tau));
    if (graph.mode == SampleMode::hard)
      for (double& v : s.adjacency.values()) v = v >= 0.5 ? 1.0 : 0.0;
  }
  s.propagation = stlgru::normalize_adjacency(s.adjacency);
  return s;
}

Matrix Model::initial_hidden(std::size_t rows, std::mt19937_64* rng) const {
  Matrix h(rows, cfg_.hidden_dim);
  if (cfg_.hidden_init == HiddenInit::gaussian) {
    std::mt19937_64 fallback(0);
    std::normal_distribution<double> normal(0.0, cfg_.hidden_sigma);
    auto& gen = rng ? *rng : fallback;
    for (double& v : h.values()) v = normal(gen);
  }
  return h;
}

Var Model::forward(Tape& t, const Bindings& p, const WindowBatch& batch, const GraphDraw& graph,
                   const Matrix& h0) const {
  if (cfg_.kind == ModelKind::persistence) {
    throw ContractError("persistence has no differentiable forward pass");
  }
  if (batch.inputs.size() != cfg_.window) {
    throw ShapeError(fmt::format("window length {} does not match configured T = {}",
                                 batch.inputs.size(), cfg_.window));
  }
  const std::size_t rows = batch.batch * cfg_.n_nodes;
  for (const auto& x : batch.inputs) {
    if (x.rows() != rows || x.cols() != cfg_.in_channels) {
      throw ShapeError(fmt::format("input step {} does not match {} nodes x {} channels",
                                   x.shape_str(), rows, cfg_.in_channels));
    }
  }
  if (h0.rows() != rows || h0.cols() != cfg_.hidden_dim) {
    throw ShapeError("initial hidden state " + h0.shape_str() + " has the wrong shape");
  }

  // One graph sample serves every timestep of the window.
  const Var prop = propagation(t, p, graph);
  const Var w_gcn = p["W_gcn"];
  const Var proj = p["proj"];
  Var h = t.constant(h0);

  std::vector<Var> projected;
  std::vector<Var> spatial;
  projected.reserve(cfg_.window);
  spatial.reserve(cfg_.window);
  for (const auto& x_raw : batch.inputs) {
    projected.push_back(ad::project_input(t, t.constant(x_raw), proj));
    spatial.push_back(ad::gcn_forward(t, projected.back(), prop, w_gcn));
  }

  switch (cfg_.kind) {
  case ModelKind::stlgru: {
    const ad::CellVars cell{proj, cfg_.use_maa ? p["psi"] : Var{}, p["W_z"], p["U_z"], p["W_r"],
                            p["U_r"], p["W_h"], p["U_h"]};
    for (std::size_t step = 0; step < cfg_.window; ++step) {
      const Var j_r = spatial[step];
      const Var j_z =
          cfg_.use_maa ? ad::maa_forward(t, j_r, h, cell.psi, cfg_.attention_axis, cfg_.n_nodes).j_z
                       : j_r;
      h = ad::gru_update(t, projected[step], j_r, j_z, h, cell);
    }
    break;
  }
  case ModelKind::gcn_gru: h = ad::gcn_gru_encode(t, p, spatial, h); break;
  case ModelKind::gcn_lstm: h = ad::gcn_lstm_encode(t, p, spatial, h); break;
  case ModelKind::gcn_tcn: h = ad::gcn_tcn_encode(t, p, spatial); break;
  case ModelKind::persistence: break;
  }

  const Var hidden = ad::relu(t, ad::add_row_vector(t, ad::matmul(t, h, p["W1"]), p["b1"]));
  return ad::add_row_vector(t, ad::matmul(t, hidden, p["W2"]), p["b2"]);
}

Matrix Model::forecast(const WindowBatch& batch, const GraphDraw& graph,
                       std::mt19937_64* rng) const {
  if (cfg_.kind == ModelKind::persistence) {
    const std::size_t rows = batch.batch * cfg_.n_nodes;
    if (batch.inputs.empty()) throw std::invalid_argument("persistence needs a non-empty window");
    Matrix out(rows, cfg_.horizon);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t h = 0; h < cfg_.horizon; ++h) out(r, h) = batch.inputs.back()(r, 0);
    return out;
  }
  Tape t;
  Bindings p(t, params_);
  const Matrix h0 = initial_hidden(batch.batch * cfg_.n_nodes, rng);
  return t.value(forward(t, p, batch, graph, h0));
}

Matrix Model::forecast(const SeriesTensor& window, const GraphDraw& graph,
                       std::mt19937_64* rng) const {
  if (window.n_nodes() != cfg_.n_nodes || window.n_channels() != cfg_.in_channels) {
    throw ShapeError(fmt::format("window has {} nodes x {} channels, model expects {} x {}",
                                 window.n_nodes(), window.n_channels(), cfg_.n_nodes,
                                 cfg_.in_channels));
  }
  if (window.n_steps() != cfg_.window && cfg_.kind != ModelKind::persistence) {
    throw ShapeError(fmt::format("window length {} does not match configured T = {}",
                                 window.n_steps(), cfg_.window));
  }
  return forecast(make_input_batch(window), graph, rng);
}

double loss(const Matrix& y_hat, const Matrix& y_true) {
  Tape t;
  return t.value(ad::loss(t, t.constant(y_hat), t.constant(y_true)))[0];
}

} // namespace stlgru
