#include "stlgru/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace stlgru {

ErrorSummary compute_metrics(std::span<const double> y_hat, std::span<const double> y_true,
                             double mape_floor) {
  if (y_hat.size() != y_true.size()) {
    throw ShapeError(fmt::format("compute_metrics: {} predictions vs {} targets", y_hat.size(),
                                 y_true.size()));
  }
  ErrorSummary s;
  s.n_evaluated = y_true.size();
  if (s.n_evaluated == 0) return s;
  double abs_sum = 0.0, sq_sum = 0.0, ape_sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double err = y_hat[i] - y_true[i];
    abs_sum += std::abs(err);
    sq_sum += err * err;
    if (y_true[i] > mape_floor) {
      ape_sum += std::abs(err) / y_true[i];
    } else {
      ++s.masked_count;
    }
  }
  const double n = static_cast<double>(s.n_evaluated);
  s.mae = abs_sum / n;
  s.rmse = std::sqrt(sq_sum / n);
  const std::size_t kept = s.n_evaluated - s.masked_count;
  s.mape = kept == 0 ? 0.0 : 100.0 * ape_sum / static_cast<double>(kept);
  return s;
}

ErrorSummary compute_metrics(const Matrix& y_hat, const Matrix& y_true, double mape_floor) {
  require_same_shape(y_hat, y_true, "compute_metrics");
  return compute_metrics(y_hat.values(), y_true.values(), mape_floor);
}

ErrorSummary merge(std::span<const ErrorSummary> parts) {
  double abs_sum = 0.0, sq_sum = 0.0, ape_sum = 0.0;
  ErrorSummary out;
  for (const auto& p : parts) {
    const double n = static_cast<double>(p.n_evaluated);
    abs_sum += p.mae * n;
    sq_sum += p.rmse * p.rmse * n;
    ape_sum += p.mape * static_cast<double>(p.n_evaluated - p.masked_count);
    out.n_evaluated += p.n_evaluated;
    out.masked_count += p.masked_count;
  }
  if (out.n_evaluated == 0) return out;
  const double n = static_cast<double>(out.n_evaluated);
  out.mae = abs_sum / n;
  out.rmse = std::sqrt(sq_sum / n);
  const std::size_t kept = out.n_evaluated - out.masked_count;
  out.mape = kept == 0 ? 0.0 : ape_sum / static_cast<double>(kept);
  return out;
}

MetricsReport horizon_report(const Matrix& y_hat, const Matrix& y_true,
                             std::span<const std::size_t> horizons, double mape_floor) {
  require_same_shape(y_hat, y_true, "horizon_report");
  MetricsReport r;
  r.average = compute_metrics(y_hat, y_true, mape_floor);
  std::vector<double> p(y_hat.rows()), q(y_hat.rows());
  for (std::size_t h : horizons) {
    if (h == 0 || h > y_hat.cols()) {
      throw std::out_of_range(
          fmt::format("horizon {} outside 1..{}", h, y_hat.cols()));
    }
    for (std::size_t i = 0; i < y_hat.rows(); ++i) {
      p[i] = y_hat(i, h - 1);
      q[i] = y_true(i, h - 1);
    }
    r.horizons.push_back({h, compute_metrics(p, q, mape_floor)});
  }
  return r;
}

CostReport count_parameters(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t c = cfg.hidden_dim;
  CostReport r;
  auto& b = r.parameter_breakdown;
  if (cfg.kind != ModelKind::persistence) {
    b["embedding"] = cfg.n_nodes * cfg.embed_dim;
    b["gcn_weight"] = c * c;
    b["input_projection"] = cfg.in_channels * c;
    b["head_fc1"] = c * c + c;
    b["head_fc2"] = c * cfg.horizon + cfg.horizon;
  }
  switch (cfg.kind) {
  case ModelKind::stlgru:
    if (cfg.use_maa) b["attention_psi"] = c * c;
    b["gates"] = 6 * c * c;
    break;
  case ModelKind::gcn_gru: b["gates"] = 6 * c * c; break;
  case ModelKind::gcn_lstm: b["gates"] = 4 * (2 * c * c + c); break;
  case ModelKind::gcn_tcn: b["temporal_conv"] = 2 * (2 * c * c + c); break;
  case ModelKind::persistence: break;
  }
  for (const auto& [name, n] : b) r.parameter_count += n;
  return r;
}

CostReport estimate_flops(const ModelConfig& cfg, std::size_t window) {
  cfg.validate();
  if (cfg.kind != ModelKind::stlgru) {
    throw std::invalid_argument("FLOP accounting covers the STLGRU cell only");
  }
  const std::size_t n = cfg.n_nodes, c = cfg.hidden_dim, t = window;
  CostReport r;
  auto& b = r.flop_breakdown;
  b["gcn"] = t * (2 * n * n * c + 2 * n * c * c);
  if (cfg.use_maa) {
    b["maa_scores"] = t * (2 * 2 * n * c * c);
    b["maa_softmax"] = t * (5 * 2 * n * c);
    b["maa_gating"] = t * (4 * n * c);
  }
  b["gate_matmuls"] = t * (6 * 2 * n * c * c);
  b["gate_elementwise"] = t * (10 * n * c);
  b["head_fc1"] = 2 * n * c * c;
  b["head_fc2"] = 2 * n * c * cfg.horizon;
  for (const auto& [name, f] : b) r.flops_per_window += f;
  return r;
}

CostReport cost_report(const ModelConfig& cfg) {
  CostReport r = count_parameters(cfg);
  if (cfg.kind == ModelKind::stlgru) {
    const CostReport f = estimate_flops(cfg, cfg.window);
    r.flops_per_window = f.flops_per_window;
    r.flop_breakdown = f.flop_breakdown;
  }
  return r;
}

} // namespace stlgru
