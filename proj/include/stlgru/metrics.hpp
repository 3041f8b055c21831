#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stlgru/config.hpp"
#include "stlgru/matrix.hpp"

namespace stlgru {

/// Error triple for one set of targets (original flow units, MAPE in percent).
struct ErrorSummary {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  std::size_t n_evaluated = 0;
  /// Targets at or below the MAPE floor, excluded from MAPE only.
  std::size_t masked_count = 0;
};

struct HorizonMetrics {
  std::size_t horizon = 0;  // 1-based step ahead
  ErrorSummary errors;
};

struct MetricsReport {
  std::vector<HorizonMetrics> horizons;
  ErrorSummary average;  // over every horizon step 1..T'
};

inline constexpr double kDefaultMapeFloor = 1.0;

ErrorSummary compute_metrics(std::span<const double> y_hat, std::span<const double> y_true,
                             double mape_floor = kDefaultMapeFloor);
ErrorSummary compute_metrics(const Matrix& y_hat, const Matrix& y_true,
                             double mape_floor = kDefaultMapeFloor);

/// Combines summaries of disjoint target sets as if computed on their union.
ErrorSummary merge(std::span<const ErrorSummary> parts);

/// Per-horizon report for predictions whose columns are horizon steps.
/// `horizons` are 1-based column indices; the average spans all columns.
MetricsReport horizon_report(const Matrix& y_hat, const Matrix& y_true,
                             std::span<const std::size_t> horizons,
                             double mape_floor = kDefaultMapeFloor);

/// Parameter and FLOP accounting. Breakdown entries sum to the totals.
struct CostReport {
  std::size_t parameter_count = 0;
  std::map<std::string, std::size_t> parameter_breakdown;
  std::size_t flops_per_window = 0;
  std::map<std::string, std::size_t> flop_breakdown;
};

/// Closed-form parameter count of the model described by `cfg`.
CostReport count_parameters(const ModelConfig& cfg);
/// FLOPs of one STLGRU forward window of length `window` (multiply-add = 2 ops).
CostReport estimate_flops(const ModelConfig& cfg, std::size_t window);
CostReport cost_report(const ModelConfig& cfg);

} // namespace stlgru
