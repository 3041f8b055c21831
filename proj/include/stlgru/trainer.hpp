#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlgru/config.hpp"
#include "stlgru/metrics.hpp"
#include "stlgru/model.hpp"
#include "stlgru/parameters.hpp"
#include "stlgru/series.hpp"

namespace stlgru {

/// Half-open range of timesteps [begin, begin + count).
struct StepRange {
  std::size_t begin = 0;
  std::size_t count = 0;
  std::size_t end() const { return begin + count; }
};

/// Literal keeps the chronological order train, test, validation;
/// conventional swaps the last two segments.
enum class SplitOrder { literal, conventional };

struct DatasetSplit {
  StepRange train;
  StepRange test;
  StepRange validation;
};

/// Chronological split: train = ⌊r₀·L⌋, test = ⌊r₁·L⌋, validation = the rest.
/// Every split with a nonzero ratio must hold at least `min_length` steps.
DatasetSplit split_dataset(std::size_t length, std::array<double, 3> ratios,
                           SplitOrder order = SplitOrder::literal, std::size_t min_length = 0);

struct WindowList {
  std::vector<std::size_t> starts;
  std::optional<std::string> warning;
};

/// Non-overlapping windows of window + horizon steps; the partial tail is dropped.
WindowList windowize(StepRange split, std::size_t window, std::size_t horizon);

struct NormalizationStats {
  double mean = 0.0;
  double std = 1.0;

  double apply(double x) const { return (x - mean) / std; }
  double invert(double z) const { return z * std + mean; }
  SeriesTensor apply(const SeriesTensor& s) const;
  Matrix invert(const Matrix& m) const;
};

/// Mean and population standard deviation of `range` (all nodes and channels).
NormalizationStats fit_normalizer(const SeriesTensor& series, StepRange range);

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const ParameterStore& params);
};

/// Bias-corrected Adam update. Returns false, leaving everything untouched,
/// when any gradient entry is non-finite.
bool adam_step(ParameterStore& params, const GradientSet& grads, AdamState& state, double lr);

/// Rescales `grads` so their global L2 norm is at most `max_norm`; returns the prior norm.
double clip_global_norm(GradientSet& grads, double max_norm);

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 16;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
  SplitOrder split_order = SplitOrder::literal;
  /// Epochs without validation-MAE improvement before stopping; 0 disables.
  std::size_t patience = 10;
  /// Global-norm clip; 0 disables.
  double clip_norm = 5.0;
  double mape_floor = kDefaultMapeFloor;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_mae = 0.0;
  std::size_t skipped_steps = 0;
};

struct TrainResult {
  ParameterStore params;  // best-validation parameters
  NormalizationStats stats;
  DatasetSplit split;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::vector<std::string> incidents;
};

/// Loss became NaN/Inf; the message names epoch, batch and seed.
class TrainingDiverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

TrainResult train(const ModelConfig& model_cfg, const SeriesTensor& data, const TrainConfig& cfg);

/// Forecasts every window with the deterministic evaluation graph and scores
/// the horizon steps in original units.
MetricsReport evaluate(const Model& model, const SeriesTensor& data,
                       std::span<const std::size_t> starts, const NormalizationStats& stats,
                       std::span<const std::size_t> horizons,
                       double mape_floor = kDefaultMapeFloor);

/// Original-unit predictions and targets for `starts`, rows stacked window-major.
std::pair<Matrix, Matrix> predict_windows(const Model& model, const SeriesTensor& data,
                                          std::span<const std::size_t> starts,
                                          const NormalizationStats& stats);

} // namespace stlgru
