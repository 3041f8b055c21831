#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlgru/config.hpp"
#include "stlgru/parameters.hpp"
#include "stlgru/trainer.hpp"

namespace stlgru {

inline constexpr const char* kCheckpointFormat = "stlgru-checkpoint/1";

/// Everything needed to rebuild a trained model and audit how it was made.
struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  ParameterStore params;
  NormalizationStats stats;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  /// Free-form echo of the effective run configuration.
  nlohmann::ordered_json run_config;
};

nlohmann::ordered_json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws FormatError on a missing or foreign format tag.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace stlgru
