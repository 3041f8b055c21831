// stlgru: synthesize data, train, evaluate and audit graph-learning GRU forecasters.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "stlgru/checkpoint.hpp"
#include "stlgru/experiment.hpp"
#include "stlgru/gradcheck.hpp"
#include "stlgru/metrics.hpp"
#include "stlgru/runtime.hpp"
#include "stlgru/series.hpp"
#include "stlgru/synthetic.hpp"
#include "stlgru/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace stlgru;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;
  std::string data;
  std::string out;
  std::string checkpoint;
  std::string model = "stlgru";
  bool no_gumbel = false;
  bool no_maa = false;
  std::size_t nodes = 20;
  std::size_t hidden_dim = 64;
  std::size_t embed_dim = 10;
  std::size_t window = 12;
  std::size_t horizon_len = 12;
  double tau = 0.5;
  std::string attention_axis = "feature";
  std::string hidden_init = "zeros";
  std::size_t epochs = 50;
  std::size_t batch = 16;
  double lr = 0.001;
  std::uint64_t seed = 0;
  std::size_t patience = 10;
  double clip = 5.0;
  std::string split_order = "literal";
  std::vector<std::size_t> horizons{3, 6, 12};
  std::string precision = "f64";
  std::string split = "test";
  bool predictions = false;
  std::size_t trials = 3;
  double tolerance = 1e-4;
  double fd_eps = 1e-5;
  bool all_models = false;
  SyntheticSpec synth;
};

ModelConfig model_config(const RunConfig& rc) {
  ModelConfig c;
  const auto kind = parse_model_kind(rc.model);
  if (!kind) throw ConfigError("model", "unknown model kind '" + rc.model + "'");
  c.kind = *kind;
  c.n_nodes = rc.nodes;
  c.hidden_dim = rc.hidden_dim;
  c.embed_dim = rc.embed_dim;
  c.window = rc.window;
  c.horizon = rc.horizon_len;
  c.tau = rc.tau;
  c.use_gumbel = !rc.no_gumbel;
  c.use_maa = !rc.no_maa;
  c.attention_axis = *parse_attention_axis(rc.attention_axis);
  c.hidden_init = *parse_hidden_init(rc.hidden_init);
  return c;
}

TrainConfig train_config(const RunConfig& rc) {
  TrainConfig c;
  c.learning_rate = rc.lr;
  c.batch_size = rc.batch;
  c.epochs = rc.epochs;
  c.seed = rc.seed;
  c.patience = rc.patience;
  c.clip_norm = rc.clip;
  c.split_order = rc.split_order == "literal" ? SplitOrder::literal : SplitOrder::conventional;
  return c;
}

ordered_json synth_json(const SyntheticSpec& s) {
  return {{"n_nodes", s.n_nodes},         {"n_steps", s.n_steps},
          {"graph_seed", s.graph_seed},   {"signal_seed", s.signal_seed},
          {"alpha", s.alpha},             {"noise_sigma", s.noise_sigma},
          {"periods", s.periods},         {"mean_degree", s.mean_degree},
          {"level", s.level},             {"scale", s.scale}};
}

ordered_json echo(const RunConfig& rc) {
  ordered_json j;
  j["command"] = rc.command;
  j["seed"] = rc.command == "synth" ? rc.synth.signal_seed : rc.seed;
  if (rc.command == "synth") {
    j["synthetic"] = synth_json(rc.synth);
    j["precision"] = rc.precision;
    j["out"] = rc.out;
    return j;
  }
  if (!rc.data.empty()) j["data"] = rc.data;
  if (!rc.out.empty()) j["out"] = rc.out;
  if (!rc.checkpoint.empty()) j["checkpoint"] = rc.checkpoint;
  j["model"] = to_json(model_config(rc));
  j["train"] = to_json(train_config(rc));
  j["horizons"] = rc.horizons;
  j["precision"] = rc.precision;
  if (rc.command == "eval") {
    j["split"] = rc.split;
    j["predictions"] = rc.predictions;
  }
  if (rc.command == "ablate") j["trials"] = rc.trials;
  if (rc.command == "gradcheck") {
    j["tolerance"] = rc.tolerance;
    j["fd_eps"] = rc.fd_eps;
    j["all_models"] = rc.all_models;
  }
  return j;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

/// CSV with the run config as a leading comment and a single header row.
std::ofstream open_csv(const fs::path& path, const ordered_json& config, const std::string& header) {
  auto f = open_output(path);
  f << "# " << config.dump() << '\n' << header << '\n';
  return f;
}

void check_horizons(const std::vector<std::size_t>& hs, std::size_t max_h) {
  for (std::size_t h : hs) {
    if (h == 0 || h > max_h) {
      throw ConfigError("horizon", fmt::format("step {} outside 1..{}", h, max_h));
    }
  }
}

SeriesTensor load_data(RunConfig& rc) {
  if (rc.data.empty()) throw ConfigError("data", "a --data file is required");
  LoadedSeries loaded = load_series(rc.data);
  rc.nodes = loaded.series.n_nodes();
  return std::move(loaded.series);
}

// ---------------------------------------------------------------------------

int cmd_synth(RunConfig& rc) {
  rc.synth.validate();
  const ordered_json cfg = echo(rc);
  fmt::print("# config {}\n", cfg.dump());
  const SyntheticData data = generate_synthetic(rc.synth);
  const fs::path dir(rc.out);
  fs::create_directories(dir);

  SeriesMetadata meta;
  meta.name = "synthetic";
  meta.interval_minutes = 5.0;
  meta.provenance = cfg.dump();
  save_series(data.series, dir / "series.stsf",
              rc.precision == "f32" ? StorageType::f32le : StorageType::f64le, meta);

  auto edges = open_csv(dir / "graph.csv", cfg, "source,target");
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.adjacency.rows(); ++i) {
    for (std::size_t j = i + 1; j < data.adjacency.cols(); ++j) {
      if (data.adjacency(i, j) != 0.0) {
        edges << i << ',' << j << '\n';
        ++count;
      }
    }
  }
  fmt::print("wrote {} ({} nodes x {} steps) and {} ({} edges)\n",
             (dir / "series.stsf").string(), data.series.n_nodes(), data.series.n_steps(),
             (dir / "graph.csv").string(), count);
  return 0;
}

int cmd_train(RunConfig& rc) {
  const SeriesTensor data = load_data(rc);
  const ModelConfig mc = model_config(rc);
  const TrainConfig tc = train_config(rc);
  mc.validate();
  tc.validate();
  if (rc.out.empty()) throw ConfigError("out", "an --out directory is required");
  const ordered_json cfg = echo(rc);
  fmt::print("# config {}\n", cfg.dump());

  const TrainResult fit = train(mc, data, tc);
  for (const auto& msg : fit.incidents) fmt::print(stderr, "warning: {}\n", msg);

  const fs::path dir(rc.out);
  Checkpoint ck;
  ck.model = mc;
  ck.train = tc;
  ck.params = fit.params;
  ck.stats = fit.stats;
  ck.history = fit.history;
  ck.best_epoch = fit.best_epoch;
  ck.run_config = cfg;
  fs::create_directories(dir);
  save_checkpoint(ck, dir / "checkpoint.json");

  auto hist = open_csv(dir / "history.csv", cfg, "epoch,train_loss,val_loss,val_mae,skipped_steps");
  for (const auto& e : fit.history) {
    hist << fmt::format("{},{},{},{},{}\n", e.epoch, e.train_loss, e.val_loss, e.val_mae,
                        e.skipped_steps);
  }
  for (const auto& e : fit.history) {
    fmt::print("epoch {:3d}  train_loss {:.5f}  val_loss {:.5f}  val_mae {:.4f}\n", e.epoch,
               e.train_loss, e.val_loss, e.val_mae);
  }
  fmt::print("best epoch {}; wrote {}\n", fit.best_epoch, (dir / "checkpoint.json").string());
  return 0;
}

int cmd_eval(RunConfig& rc) {
  if (rc.checkpoint.empty()) throw ConfigError("checkpoint", "a --checkpoint file is required");
  const Checkpoint ck = load_checkpoint(rc.checkpoint);
  const SeriesTensor data = load_data(rc);
  if (ck.model.n_nodes != data.n_nodes()) {
    throw ConfigError("n_nodes", fmt::format("checkpoint has {} nodes but the dataset has {}",
                                             ck.model.n_nodes, data.n_nodes()));
  }
  if (ck.model.in_channels != data.n_channels()) {
    throw ConfigError("in_channels",
                      fmt::format("checkpoint has {} channels but the dataset has {}",
                                  ck.model.in_channels, data.n_channels()));
  }
  check_horizons(rc.horizons, ck.model.horizon);

  // The checkpoint decides the model; echo what actually runs.
  rc.model = std::string(to_string(ck.model.kind));
  rc.no_gumbel = !ck.model.use_gumbel;
  rc.no_maa = !ck.model.use_maa;
  rc.hidden_dim = ck.model.hidden_dim;
  rc.embed_dim = ck.model.embed_dim;
  rc.window = ck.model.window;
  rc.horizon_len = ck.model.horizon;
  rc.tau = ck.model.tau;
  rc.attention_axis = std::string(to_string(ck.model.attention_axis));
  rc.hidden_init = std::string(to_string(ck.model.hidden_init));
  rc.seed = ck.train.seed;
  ordered_json cfg = echo(rc);
  cfg["model"] = to_json(ck.model);
  cfg["train"] = to_json(ck.train);
  fmt::print("# config {}\n", cfg.dump());

  const std::size_t stride = ck.model.window + ck.model.horizon;
  const DatasetSplit split =
      split_dataset(data.n_steps(), ck.train.split_ratios, ck.train.split_order, stride);
  const StepRange range = rc.split == "train"        ? split.train
                          : rc.split == "validation" ? split.validation
                                                     : split.test;
  const WindowList windows = windowize(range, ck.model.window, ck.model.horizon);
  if (windows.warning) fmt::print(stderr, "warning: {}\n", *windows.warning);
  if (windows.starts.empty()) {
    throw std::runtime_error(fmt::format("{} split holds no complete window", rc.split));
  }

  const Model model(ck.model, ck.params);
  const auto [y_hat, y_true] = predict_windows(model, data, windows.starts, ck.stats);
  const MetricsReport report = horizon_report(y_hat, y_true, rc.horizons, ck.train.mape_floor);

  fmt::print("{:>8} {:>10} {:>10} {:>9} {:>8}\n", "horizon", "MAE", "RMSE", "MAPE%", "masked");
  auto row = [](const std::string& label, const ErrorSummary& e) {
    fmt::print("{:>8} {:>10.4f} {:>10.4f} {:>9.3f} {:>8}\n", label, e.mae, e.rmse, e.mape,
               e.masked_count);
  };
  for (const auto& h : report.horizons) row(std::to_string(h.horizon), h.errors);
  row("average", report.average);

  if (!rc.out.empty()) {
    const fs::path dir(rc.out);
    auto f = open_csv(dir / "metrics.csv", cfg, "horizon,mae,rmse,mape,n_evaluated,masked_count");
    auto line = [&f](const std::string& label, const ErrorSummary& e) {
      f << fmt::format("{},{},{},{},{},{}\n", label, e.mae, e.rmse, e.mape, e.n_evaluated,
                       e.masked_count);
    };
    for (const auto& h : report.horizons) line(std::to_string(h.horizon), h.errors);
    line("average", report.average);

    if (rc.predictions) {
      auto p = open_csv(dir / "predictions.csv", cfg, "window_start,node,horizon,prediction,target");
      const std::size_t n = data.n_nodes();
      for (std::size_t r = 0; r < y_hat.rows(); ++r) {
        for (std::size_t h = 0; h < y_hat.cols(); ++h) {
          p << fmt::format("{},{},{},{},{}\n", windows.starts[r / n], r % n, h + 1, y_hat(r, h),
                           y_true(r, h));
        }
      }
    }
  }
  return 0;
}

bool report_gradcheck(const GradCheckReport& rep, double tol) {
  const bool ok = rep.max_relative_error <= tol;
  fmt::print("{} gumbel={} maa={} axis={}: max relative error {:.3e} ({})\n",
             to_string(rep.config.kind), rep.config.use_gumbel, rep.config.use_maa,
             to_string(rep.config.attention_axis), rep.max_relative_error, ok ? "ok" : "FAILED");
  for (const auto& t : rep.tensors) {
    fmt::print("  {:<8} {:>5} values  rel err {:.3e}\n", t.name, t.size, t.relative_error);
  }
  return ok;
}

int cmd_gradcheck(RunConfig& rc) {
  ModelConfig toy = toy_gradcheck_config();
  const ModelConfig requested = model_config(rc);
  toy.kind = requested.kind;
  toy.use_gumbel = requested.use_gumbel;
  toy.use_maa = requested.use_maa;
  toy.attention_axis = requested.attention_axis;
  toy.hidden_init = requested.hidden_init;
  toy.tau = requested.tau;
  if (toy.kind == ModelKind::persistence) {
    throw ConfigError("model", "persistence has no parameters to check");
  }
  if (rc.fd_eps <= 0.0) throw ConfigError("eps", "must be positive");
  rc.nodes = toy.n_nodes;
  rc.hidden_dim = toy.hidden_dim;
  rc.embed_dim = toy.embed_dim;
  rc.window = toy.window;
  rc.horizon_len = toy.horizon;
  fmt::print("# config {}\n", echo(rc).dump());

  std::vector<ModelConfig> configs;
  if (rc.all_models) {
    for (bool g : {true, false}) {
      for (bool m : {true, false}) {
        ModelConfig c = toy;
        c.kind = ModelKind::stlgru;
        c.use_gumbel = g;
        c.use_maa = m;
        configs.push_back(c);
      }
    }
    ModelConfig node_axis = toy;
    node_axis.kind = ModelKind::stlgru;
    node_axis.attention_axis = AttentionAxis::node;
    configs.push_back(node_axis);
    for (ModelKind k : {ModelKind::gcn_gru, ModelKind::gcn_lstm, ModelKind::gcn_tcn}) {
      ModelConfig c = toy;
      c.kind = k;
      configs.push_back(c);
    }
  } else {
    configs.push_back(toy);
  }

  bool ok = true;
  double worst = 0.0;
  for (const auto& c : configs) {
    const GradCheckReport rep = run_gradient_check(c, rc.seed, rc.fd_eps);
    ok = report_gradcheck(rep, rc.tolerance) && ok;
    worst = std::max(worst, rep.max_relative_error);
  }
  fmt::print("max relative error {:.3e} (tolerance {:.1e}): {}\n", worst, rc.tolerance,
             ok ? "PASS" : "FAIL");
  return ok ? 0 : kExitRuntime;
}

int cmd_inspect(RunConfig& rc) {
  if (!rc.data.empty()) {
    const LoadedSeries loaded = load_series(rc.data);
    rc.nodes = loaded.series.n_nodes();
    fmt::print("data {}: {} nodes, {} steps, {} channel(s), {}\n", rc.data,
               loaded.series.n_nodes(), loaded.series.n_steps(), loaded.series.n_channels(),
               loaded.dtype == StorageType::f32le ? "f32le" : "f64le");
  }
  const ModelConfig mc = model_config(rc);
  mc.validate();
  fmt::print("# config {}\n", echo(rc).dump());

  const CostReport params = count_parameters(mc);
  fmt::print("parameters: {} ({:.2f}K)\n", params.parameter_count,
             static_cast<double>(params.parameter_count) / 1e3);
  for (const auto& [name, n] : params.parameter_breakdown) fmt::print("  {:<12} {}\n", name, n);
  if (mc.kind == ModelKind::stlgru) {
    const CostReport flops = estimate_flops(mc, mc.window);
    fmt::print("FLOPs per window: {} ({:.3f}G)\n", flops.flops_per_window,
               static_cast<double>(flops.flops_per_window) / 1e9);
    for (const auto& [name, n] : flops.flop_breakdown) fmt::print("  {:<16} {}\n", name, n);
  }
  if (mc.kind == ModelKind::stlgru && mc.n_nodes == 307) {
    fmt::print("reference for the PeMSD4 setting: 348.54K parameters, 77.93G FLOPs "
               "(layer composition not fully known; soft comparison)\n");
  }
  return 0;
}

int cmd_ablate(RunConfig& rc) {
  SeriesTensor data;
  if (rc.data.empty()) {
    data = generate_synthetic(rc.synth).series;
    rc.nodes = data.n_nodes();
  } else {
    data = load_data(rc);
  }
  if (rc.trials == 0) throw ConfigError("trials", "must be at least 1");
  const ModelConfig mc = model_config(rc);
  const TrainConfig tc = train_config(rc);
  mc.validate();
  tc.validate();
  ordered_json cfg = echo(rc);
  if (rc.data.empty()) cfg["synthetic"] = synth_json(rc.synth);
  fmt::print("# config {}\n", cfg.dump());

  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < rc.trials; ++i) seeds.push_back(rc.seed + i);
  std::vector<AblationRow> rows = run_ablation(mc, data, tc, seeds);

  // Reference MAEs of the same four cells at 60 minutes on PeMSD8.
  const std::map<std::string, double> reference{
      {"full", 16.83}, {"gumbel-only", 19.83}, {"maa-only", 21.74}, {"neither", 23.12}};
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
    return a.mean_mae() < b.mean_mae();
  });

  fmt::print("{:<12} {:>7} {:>5} {:>10} {:>12} {:>14}\n", "variant", "gumbel", "maa", "mean MAE",
             "persistence", "reference MAE");
  for (const auto& r : rows) {
    double pers = 0.0;
    for (const auto& t : r.trials) pers += t.persistence_mae;
    pers /= static_cast<double>(r.trials.size());
    fmt::print("{:<12} {:>7} {:>5} {:>10.4f} {:>12.4f} {:>14.2f}\n", r.label, r.use_gumbel,
               r.use_maa, r.mean_mae(), pers, reference.at(r.label));
  }

  if (!rc.out.empty()) {
    auto f = open_csv(fs::path(rc.out) / "ablation.csv", cfg,
                      "variant,use_gumbel,use_maa,seed,mae,persistence_mae,best_epoch,mean_mae");
    for (const auto& r : rows) {
      for (const auto& t : r.trials) {
        f << fmt::format("{},{},{},{},{},{},{},{}\n", r.label, r.use_gumbel, r.use_maa, t.seed,
                         t.model_mae, t.persistence_mae, t.best_epoch, r.mean_mae());
      }
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

void add_model_flags(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--model", rc.model, "Model kind")
      ->check(CLI::IsMember({"stlgru", "gcn_gru", "gcn_lstm", "gcn_tcn", "persistence"}))
      ->capture_default_str();
  sub->add_flag("--no-gumbel", rc.no_gumbel, "Use the deterministic softmax graph");
  sub->add_flag("--no-maa", rc.no_maa, "Bypass memory-augmented attention");
  sub->add_option("--hidden-dim", rc.hidden_dim, "Hidden width C'")->capture_default_str();
  sub->add_option("--embed-dim", rc.embed_dim, "Node embedding width d")->capture_default_str();
  sub->add_option("--window", rc.window, "Input steps T")->capture_default_str();
  sub->add_option("--horizon-steps", rc.horizon_len, "Forecast steps T'")->capture_default_str();
  sub->add_option("--tau", rc.tau, "Gumbel temperature")->capture_default_str();
  sub->add_option("--attention-axis", rc.attention_axis, "Attention softmax axis")
      ->check(CLI::IsMember({"feature", "node"}))
      ->capture_default_str();
  sub->add_option("--hidden-init", rc.hidden_init, "Initial hidden state")
      ->check(CLI::IsMember({"zeros", "gaussian"}))
      ->capture_default_str();
  sub->add_option("--precision", rc.precision, "Storage precision of written series")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
}

void add_train_flags(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--epochs", rc.epochs)->capture_default_str();
  sub->add_option("--batch", rc.batch)->capture_default_str();
  sub->add_option("--lr", rc.lr)->capture_default_str();
  sub->add_option("--seed", rc.seed)->capture_default_str();
  sub->add_option("--patience", rc.patience, "Early-stopping patience, 0 disables")
      ->capture_default_str();
  sub->add_option("--clip", rc.clip, "Global gradient-norm clip, 0 disables")
      ->capture_default_str();
  sub->add_option("--split-order", rc.split_order, "Chronological order of test and validation")
      ->check(CLI::IsMember({"literal", "conventional"}))
      ->capture_default_str();
}

void add_synth_flags(CLI::App* sub, RunConfig& rc, bool own_seed) {
  auto& s = rc.synth;
  sub->add_option("--nodes", s.n_nodes)->capture_default_str();
  sub->add_option("--steps", s.n_steps)->capture_default_str();
  sub->add_option("--graph-seed", s.graph_seed)->capture_default_str();
  if (own_seed) {
    sub->add_option("--seed", s.signal_seed, "Signal seed")->capture_default_str();
  } else {
    sub->add_option("--signal-seed", s.signal_seed)->capture_default_str();
  }
  sub->add_option("--alpha", s.alpha, "Neighbour diffusion weight")->capture_default_str();
  sub->add_option("--noise", s.noise_sigma)->capture_default_str();
  sub->add_option("--periods", s.periods)->delimiter(',')->capture_default_str();
  sub->add_option("--mean-degree", s.mean_degree)->capture_default_str();
}

/// Reads flat config keys into the selected subcommand.
class SubcommandConfig : public CLI::ConfigTOML {
public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    const auto subs = app_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty()) item.parents.push_back(subs.front()->get_name());
    }
    return items;
  }

private:
  const CLI::App* app_;
};

int run(int argc, char** argv) {
  RunConfig rc;
  CLI::App app{"Graph-learning GRU traffic forecaster"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Write a synthetic series and its ground-truth graph");
  synth->add_option("--out", rc.out, "Output directory")->required();
  synth->add_option("--precision", rc.precision, "Stored value type")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
  add_synth_flags(synth, rc, true);

  auto* train = app.add_subcommand("train", "Fit a model and write checkpoint and history");
  train->add_option("--data", rc.data, "STSF series")->required();
  train->add_option("--out", rc.out, "Output directory")->required();
  train->add_option("--horizon", rc.horizons, "Horizon steps recorded with the run")
      ->delimiter(',')
      ->capture_default_str();
  add_model_flags(train, rc);
  add_train_flags(train, rc);

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset split");
  eval->add_option("--checkpoint", rc.checkpoint)->required();
  eval->add_option("--data", rc.data, "STSF series")->required();
  eval->add_option("--out", rc.out, "Directory for metrics.csv");
  eval->add_option("--horizon", rc.horizons, "1-based horizon steps")
      ->delimiter(',')
      ->capture_default_str();
  eval->add_option("--split", rc.split)
      ->check(CLI::IsMember({"train", "validation", "test"}))
      ->capture_default_str();
  eval->add_flag("--predictions", rc.predictions, "Also write predictions.csv");
  eval->add_option("--precision", rc.precision)
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  add_model_flags(grad, rc);
  grad->add_option("--seed", rc.seed)->capture_default_str();
  grad->add_option("--tolerance", rc.tolerance)->capture_default_str();
  grad->add_option("--eps", rc.fd_eps)->capture_default_str();
  grad->add_flag("--all", rc.all_models, "Check every model variant");

  auto* inspect = app.add_subcommand("inspect", "Print parameter and FLOP accounting");
  inspect->add_option("--data", rc.data, "Take the node count from this series");
  inspect->add_option("--nodes", rc.nodes)->capture_default_str();
  add_model_flags(inspect, rc);

  auto* ablate = app.add_subcommand("ablate", "Train the four attention/sampling variants");
  ablate->add_option("--data", rc.data, "STSF series; default is the synthetic benchmark");
  ablate->add_option("--out", rc.out, "Directory for ablation.csv");
  ablate->add_option("--trials", rc.trials, "Seeds per variant, counting up from --seed")
      ->capture_default_str();
  ablate->add_option("--horizon", rc.horizons)->delimiter(',')->capture_default_str();
  add_model_flags(ablate, rc);
  add_train_flags(ablate, rc);
  add_synth_flags(ablate, rc, false);

  // Flags named after --config may appear after the subcommand; its keys are
  // the long flag names and apply to whichever subcommand runs.
  for (auto* sub : {synth, train, eval, grad, inspect, ablate}) sub->fallthrough();
  app.set_config("--config", "", "TOML or INI file of flag values; explicit flags win");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  for (auto* sub : app.get_subcommands()) rc.command = sub->get_name();
  try {
    if (rc.command == "synth") return cmd_synth(rc);
    if (rc.command == "train") return cmd_train(rc);
    if (rc.command == "eval") return cmd_eval(rc);
    if (rc.command == "gradcheck") return cmd_gradcheck(rc);
    if (rc.command == "inspect") return cmd_inspect(rc);
    if (rc.command == "ablate") return cmd_ablate(rc);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: invalid {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
  tune_allocator();
  return run(argc, argv);
}
