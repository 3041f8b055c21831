#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stlgru {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

enum class ModelKind { stlgru, gcn_gru, gcn_lstm, gcn_tcn, persistence };

/// Feature: every row of the attention scores is normalized over its C'
/// features. Node: every column is normalized over the N nodes of its half.
enum class AttentionAxis { feature, node };

enum class HiddenInit { zeros, gaussian };

struct ModelConfig {
  ModelKind kind = ModelKind::stlgru;
  std::size_t n_nodes = 0;
  std::size_t in_channels = 1;
  std::size_t hidden_dim = 64;  // C'
  std::size_t embed_dim = 10;   // d
  std::size_t window = 12;      // T
  std::size_t horizon = 12;     // T'
  double tau = 0.5;
  bool use_gumbel = true;
  bool use_maa = true;
  AttentionAxis attention_axis = AttentionAxis::feature;
  HiddenInit hidden_init = HiddenInit::zeros;
  double hidden_sigma = 0.1;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// The ablation and comparison variants.
enum class BaselineKind {
  persistence,
  gcn_tcn,
  gcn_lstm,
  gcn_gru,
  stlgru_no_maa,
  stlgru_no_gumbel,
  stlgru_no_both,
};

/// Rewrites kind and ablation switches of `base` to realize `kind`.
ModelConfig configure_baseline(ModelConfig base, BaselineKind kind);

std::string_view to_string(ModelKind k);
std::string_view to_string(AttentionAxis a);
std::string_view to_string(HiddenInit h);
std::string_view to_string(BaselineKind k);
std::optional<ModelKind> parse_model_kind(std::string_view s);
std::optional<AttentionAxis> parse_attention_axis(std::string_view s);
std::optional<HiddenInit> parse_hidden_init(std::string_view s);

} // namespace stlgru
