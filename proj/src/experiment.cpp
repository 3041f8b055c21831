#include "stlgru/experiment.hpp"

#include <numeric>

namespace stlgru {

TrialOutcome run_trial(const ModelConfig& model_cfg, const SeriesTensor& data,
                       const TrainConfig& train_cfg) {
  const TrainResult fit = train(model_cfg, data, train_cfg);
  const WindowList windows = windowize(fit.split.validation, model_cfg.window, model_cfg.horizon);
  if (windows.starts.empty()) {
    throw std::invalid_argument("validation split holds no complete window");
  }
  const Model model(model_cfg, fit.params);
  ModelConfig naive = model_cfg;
  naive.kind = ModelKind::persistence;
  const Model persistence(naive, ParameterStore{});

  TrialOutcome out;
  out.seed = train_cfg.seed;
  out.model_mae = evaluate(model, data, windows.starts, fit.stats, {}, train_cfg.mape_floor).average.mae;
  out.persistence_mae =
      evaluate(persistence, data, windows.starts, fit.stats, {}, train_cfg.mape_floor).average.mae;
  out.best_epoch = fit.best_epoch;
  out.epochs_run = fit.history.size();
  return out;
}

double AblationRow::mean_mae() const {
  if (trials.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : trials) s += t.model_mae;
  return s / static_cast<double>(trials.size());
}

std::vector<AblationRow> run_ablation(const ModelConfig& base, const SeriesTensor& data,
                                      const TrainConfig& train_cfg,
                                      std::span<const std::uint64_t> seeds) {
  std::vector<AblationRow> rows{
      {"full", true, true, {}},
      {"gumbel-only", true, false, {}},
      {"maa-only", false, true, {}},
      {"neither", false, false, {}},
  };
  for (auto& row : rows) {
    ModelConfig cfg = base;
    cfg.kind = ModelKind::stlgru;
    cfg.use_gumbel = row.use_gumbel;
    cfg.use_maa = row.use_maa;
    for (const std::uint64_t seed : seeds) {
      TrainConfig tc = train_cfg;
      tc.seed = seed;
      row.trials.push_back(run_trial(cfg, data, tc));
    }
  }
  return rows;
}

} // namespace stlgru
