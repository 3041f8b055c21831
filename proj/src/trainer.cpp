#include "stlgru/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace stlgru {

DatasetSplit split_dataset(std::size_t length, std::array<double, 3> ratios, SplitOrder order,
                           std::size_t min_length) {
  for (double r : ratios)
    if (!(r >= 0.0)) throw ConfigError("split_ratios", "ratios must be nonnegative");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw ConfigError("split_ratios", "ratios must sum to 1");
  }
  const double len = static_cast<double>(length);
  // The epsilon absorbs representation error in products such as 0.6 · 10.
  const auto n_train = static_cast<std::size_t>(std::floor(ratios[0] * len + 1e-9));
  const auto n_second = static_cast<std::size_t>(std::floor(ratios[1] * len + 1e-9));
  const std::size_t n_third = length - std::min(length, n_train + n_second);

  DatasetSplit s;
  s.train = {0, n_train};
  if (order == SplitOrder::literal) {
    s.test = {n_train, n_second};
    s.validation = {n_train + n_second, n_third};
  } else {
    s.validation = {n_train, n_second};
    s.test = {n_train + n_second, n_third};
  }
  const std::array<std::size_t, 3> sizes{n_train, n_second, n_third};
  const std::array<const char*, 3> names =
      order == SplitOrder::literal ? std::array{"train", "test", "validation"}
                                   : std::array{"train", "validation", "test"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (ratios[i] > 0.0 && sizes[i] < min_length) {
      throw std::invalid_argument(
          fmt::format("series of {} steps leaves the {} split with {} steps, fewer than one "
                      "window ({})",
                      length, names[i], sizes[i], min_length));
    }
  }
  return s;
}

WindowList windowize(StepRange split, std::size_t window, std::size_t horizon) {
  const std::size_t stride = window + horizon;
  WindowList out;
  if (stride == 0) throw std::invalid_argument("windowize: window + horizon must be positive");
  for (std::size_t s = split.begin; s + stride <= split.end(); s += stride) out.starts.push_back(s);
  if (out.starts.empty()) {
    out.warning = fmt::format("split of {} steps is shorter than one window of {}", split.count,
                              stride);
  }
  return out;
}

SeriesTensor NormalizationStats::apply(const SeriesTensor& s) const {
  SeriesTensor out = s;
  for (double& v : out.values()) v = apply(v);
  return out;
}

Matrix NormalizationStats::invert(const Matrix& m) const {
  Matrix out = m;
  for (double& v : out.values()) v = invert(v);
  return out;
}

NormalizationStats fit_normalizer(const SeriesTensor& series, StepRange range) {
  if (range.count == 0) throw std::invalid_argument("fit_normalizer: empty training split");
  const SeriesTensor part = series.slice_steps(range.begin, range.count);
  const auto& v = part.values();
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double std = std::sqrt(ss / n);
  if (!(std > 0.0)) {
    throw std::invalid_argument(
        "training split has zero variance; regenerate the synthetic data with noise or periods");
  }
  return {mean, std};
}

AdamState AdamState::for_params(const ParameterStore& params) {
  AdamState s;
  for (const auto& p : params.entries()) {
    s.m.emplace_back(p.value.rows(), p.value.cols());
    s.v.emplace_back(p.value.rows(), p.value.cols());
  }
  return s;
}

bool adam_step(ParameterStore& params, const GradientSet& grads, AdamState& state, double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw ShapeError("adam_step: gradients, moments and parameters are not aligned");
  }
  for (std::size_t k = 0; k < grads.size(); ++k) {
    require_same_shape(grads[k], params.entries()[k].value, "adam_step");
    if (!all_finite(grads[k])) return false;
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < grads.size(); ++k) {
    Matrix& w = params.entries()[k].value;
    Matrix& m = state.m[k];
    Matrix& v = state.v[k];
    const Matrix& g = grads[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
  return true;
}

double clip_global_norm(GradientSet& grads, double max_norm) {
  double ss = 0.0;
  for (const auto& g : grads)
    for (double x : g.values()) ss += x * x;
  const double norm = std::sqrt(ss);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads) g *= s;
  }
  return norm;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size", "must be at least 1");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm", "must be >= 0");
  double sum = 0.0;
  for (double r : split_ratios) {
    if (!(r >= 0.0)) throw ConfigError("split_ratios", "ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split_ratios", "ratios must sum to 1");
}

std::pair<Matrix, Matrix> predict_windows(const Model& model, const SeriesTensor& data,
                                          std::span<const std::size_t> starts,
                                          const NormalizationStats& stats) {
  const auto& cfg = model.config();
  const SeriesTensor normalized = stats.apply(data);
  const WindowBatch input = make_batch(normalized, starts, cfg.window, cfg.horizon);
  const WindowBatch raw = make_batch(data, starts, cfg.window, cfg.horizon);
  std::mt19937_64 hidden_rng(0);
  Matrix y_hat = stats.invert(model.forecast(input, GraphDraw::evaluation(cfg.n_nodes), &hidden_rng));
  return {std::move(y_hat), raw.targets};
}

MetricsReport evaluate(const Model& model, const SeriesTensor& data,
                       std::span<const std::size_t> starts, const NormalizationStats& stats,
                       std::span<const std::size_t> horizons, double mape_floor) {
  if (starts.empty()) throw std::invalid_argument("evaluate: no windows to score");
  const auto [y_hat, y_true] = predict_windows(model, data, starts, stats);
  return horizon_report(y_hat, y_true, horizons, mape_floor);
}

namespace {

double batch_loss(const Model& model, const WindowBatch& batch, std::mt19937_64& rng) {
  const auto& cfg = model.config();
  return loss(model.forecast(batch, GraphDraw::evaluation(cfg.n_nodes), &rng), batch.targets);
}

} // namespace

TrainResult train(const ModelConfig& model_cfg, const SeriesTensor& data, const TrainConfig& cfg) {
  model_cfg.validate();
  cfg.validate();
  if (data.n_nodes() != model_cfg.n_nodes) {
    throw ConfigError("n_nodes", fmt::format("model has {} nodes but the data has {}",
                                             model_cfg.n_nodes, data.n_nodes()));
  }
  if (data.n_channels() != model_cfg.in_channels) {
    throw ConfigError("in_channels", fmt::format("model expects {} channels but the data has {}",
                                                 model_cfg.in_channels, data.n_channels()));
  }
  const std::size_t stride = model_cfg.window + model_cfg.horizon;

  TrainResult result;
  result.split = split_dataset(data.n_steps(), cfg.split_ratios, cfg.split_order, stride);
  result.stats = fit_normalizer(data, result.split.train);
  const SeriesTensor normalized = result.stats.apply(data);

  auto train_windows = windowize(result.split.train, model_cfg.window, model_cfg.horizon);
  const auto val_windows = windowize(result.split.validation, model_cfg.window, model_cfg.horizon);
  if (train_windows.warning) result.incidents.push_back("train: " + *train_windows.warning);
  if (val_windows.warning) result.incidents.push_back("validation: " + *val_windows.warning);

  Model model(model_cfg, cfg.seed);
  result.params = model.params();
  if (cfg.epochs == 0 || model_cfg.kind == ModelKind::persistence) return result;
  if (train_windows.starts.empty()) throw std::invalid_argument("no training windows");

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState adam = AdamState::for_params(model.params());
  const WindowBatch val_batch =
      val_windows.starts.empty()
          ? WindowBatch{}
          : make_batch(normalized, val_windows.starts, model_cfg.window, model_cfg.horizon);
  static constexpr std::size_t kNoHorizons[] = {0};

  double best_mae = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> order = train_windows.starts;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
      const std::size_t nb = std::min(cfg.batch_size, order.size() - b0);
      const WindowBatch batch =
          make_batch(normalized, std::span(order).subspan(b0, nb), model_cfg.window,
                     model_cfg.horizon);
      // One fresh graph sample per optimizer step.
      const GraphDraw graph =
          model_cfg.use_gumbel ? GraphDraw::relaxed(GumbelNoise::draw(model_cfg.n_nodes, rng))
                               : GraphDraw::evaluation(model_cfg.n_nodes);
      Tape tape;
      Bindings bound(tape, model.params());
      const Matrix h0 = model.initial_hidden(nb * model_cfg.n_nodes, &rng);
      const Var y_hat = model.forward(tape, bound, batch, graph, h0);
      const Var l = ad::loss(tape, y_hat, tape.constant(batch.targets));
      const double value = tape.value(l)[0];
      if (!std::isfinite(value)) {
        throw TrainingDiverged(fmt::format("loss {} at epoch {} batch {} (seed {})", value, epoch,
                                           b0 / cfg.batch_size, cfg.seed));
      }
      GradientSet grads = gradient_of_scalar(tape, l, bound, model.params());
      if (cfg.clip_norm > 0.0) clip_global_norm(grads, cfg.clip_norm);
      if (!adam_step(model.params(), grads, adam, cfg.learning_rate)) {
        ++rec.skipped_steps;
        result.incidents.push_back(fmt::format("non-finite gradient at epoch {} batch {}: step skipped",
                                               epoch, b0 / cfg.batch_size));
      }
      loss_sum += value;
      ++batches;
    }
    rec.train_loss = loss_sum / static_cast<double>(batches);

    if (!val_windows.starts.empty()) {
      rec.val_loss = batch_loss(model, val_batch, rng);
      rec.val_mae = evaluate(model, data, val_windows.starts, result.stats,
                             std::span(kNoHorizons, 0), cfg.mape_floor)
                        .average.mae;
    } else {
      rec.val_loss = rec.train_loss;
      rec.val_mae = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.push_back(rec);

    const double score = val_windows.starts.empty() ? rec.train_loss : rec.val_mae;
    if (score < best_mae) {
      best_mae = score;
      since_best = 0;
      result.params = model.params();
      result.best_epoch = epoch;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

} // namespace stlgru
