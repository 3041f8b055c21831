#include "stlgru/checkpoint.hpp"

#include <fstream>

#include "stlgru/series.hpp"

namespace stlgru {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_json(const ModelConfig& c) {
  ordered_json j;
  j["kind"] = to_string(c.kind);
  j["n_nodes"] = c.n_nodes;
  j["in_channels"] = c.in_channels;
  j["hidden_dim"] = c.hidden_dim;
  j["embed_dim"] = c.embed_dim;
  j["window"] = c.window;
  j["horizon"] = c.horizon;
  j["tau"] = c.tau;
  j["use_gumbel"] = c.use_gumbel;
  j["use_maa"] = c.use_maa;
  j["attention_axis"] = to_string(c.attention_axis);
  j["hidden_init"] = to_string(c.hidden_init);
  j["hidden_sigma"] = c.hidden_sigma;
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  if (!kind) throw ConfigError("kind", "unknown model kind " + j.at("kind").dump());
  c.kind = *kind;
  c.n_nodes = j.at("n_nodes").get<std::size_t>();
  c.in_channels = j.at("in_channels").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.window = j.at("window").get<std::size_t>();
  c.horizon = j.at("horizon").get<std::size_t>();
  c.tau = j.at("tau").get<double>();
  c.use_gumbel = j.at("use_gumbel").get<bool>();
  c.use_maa = j.at("use_maa").get<bool>();
  const auto axis = parse_attention_axis(j.at("attention_axis").get<std::string>());
  if (!axis) throw ConfigError("attention_axis", "unknown value");
  c.attention_axis = *axis;
  const auto init = parse_hidden_init(j.at("hidden_init").get<std::string>());
  if (!init) throw ConfigError("hidden_init", "unknown value");
  c.hidden_init = *init;
  c.hidden_sigma = j.at("hidden_sigma").get<double>();
  return c;
}

ordered_json to_json(const TrainConfig& c) {
  ordered_json j;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["split_ratios"] = c.split_ratios;
  j["split_order"] = c.split_order == SplitOrder::literal ? "literal" : "conventional";
  j["patience"] = c.patience;
  j["clip_norm"] = c.clip_norm;
  j["mape_floor"] = c.mape_floor;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.split_ratios = j.at("split_ratios").get<std::array<double, 3>>();
  c.split_order =
      j.at("split_order").get<std::string>() == "literal" ? SplitOrder::literal
                                                          : SplitOrder::conventional;
  c.patience = j.at("patience").get<std::size_t>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.mape_floor = j.at("mape_floor").get<double>();
  return c;
}

ordered_json to_json(const Checkpoint& ck) {
  ordered_json j;
  j["format"] = kCheckpointFormat;
  j["model"] = to_json(ck.model);
  j["train"] = to_json(ck.train);
  j["seed"] = ck.train.seed;
  j["run_config"] = ck.run_config;
  j["normalizer"] = {{"mean", ck.stats.mean}, {"std", ck.stats.std}};
  j["best_epoch"] = ck.best_epoch;
  ordered_json hist = ordered_json::array();
  for (const auto& e : ck.history) {
    hist.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_loss", e.val_loss},
                    {"val_mae", e.val_mae},
                    {"skipped_steps", e.skipped_steps}});
  }
  j["history"] = std::move(hist);
  ordered_json params = ordered_json::array();
  for (const auto& p : ck.params.entries()) {
    params.push_back({{"name", p.name},
                      {"rows", p.value.rows()},
                      {"cols", p.value.cols()},
                      {"values", std::vector<double>(p.value.values().begin(),
                                                     p.value.values().end())}});
  }
  j["parameters"] = std::move(params);
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  if (!j.contains("format") || j["format"] != kCheckpointFormat) {
    throw FormatError(std::string("not a checkpoint of format ") + kCheckpointFormat);
  }
  Checkpoint ck;
  try {
    ck.model = model_config_from_json(j.at("model"));
    ck.train = train_config_from_json(j.at("train"));
    ck.run_config = j.value("run_config", ordered_json::object());
    ck.stats.mean = j.at("normalizer").at("mean").get<double>();
    ck.stats.std = j.at("normalizer").at("std").get<double>();
    ck.best_epoch = j.at("best_epoch").get<std::size_t>();
    for (const auto& e : j.at("history")) {
      EpochRecord r;
      r.epoch = e.at("epoch").get<std::size_t>();
      r.train_loss = e.at("train_loss").get<double>();
      r.val_loss = e.at("val_loss").get<double>();
      // NaN is written as null.
      r.val_mae = e.at("val_mae").is_null() ? std::nan("") : e.at("val_mae").get<double>();
      r.skipped_steps = e.at("skipped_steps").get<std::size_t>();
      ck.history.push_back(r);
    }
    for (const auto& p : j.at("parameters")) {
      ck.params.add(p.at("name").get<std::string>(),
                    Matrix(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>(),
                           p.at("values").get<std::vector<double>>()));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << to_json(ckpt).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(j);
}

} // namespace stlgru
