#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stlgru/config.hpp"
#include "stlgru/series.hpp"
#include "stlgru/trainer.hpp"

namespace stlgru {

/// One trained model scored against persistence on the validation windows.
struct TrialOutcome {
  std::uint64_t seed = 0;
  double model_mae = 0.0;
  double persistence_mae = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

TrialOutcome run_trial(const ModelConfig& model_cfg, const SeriesTensor& data,
                       const TrainConfig& train_cfg);

struct AblationRow {
  std::string label;  // full, gumbel-only, maa-only, neither
  bool use_gumbel = true;
  bool use_maa = true;
  std::vector<TrialOutcome> trials;

  double mean_mae() const;
};

/// Trains the four switch combinations of the STLGRU model once per seed.
/// Rows come back in the fixed order full, gumbel-only, maa-only, neither.
std::vector<AblationRow> run_ablation(const ModelConfig& base, const SeriesTensor& data,
                                      const TrainConfig& train_cfg,
                                      std::span<const std::uint64_t> seeds);

} // namespace stlgru
