#include "stlgru/config.hpp"

#include <cmath>

namespace stlgru {

void ModelConfig::validate() const {
  if (n_nodes == 0) throw ConfigError("n_nodes", "must be at least 1");
  if (in_channels == 0) throw ConfigError("in_channels", "must be at least 1");
  if (hidden_dim == 0) throw ConfigError("hidden_dim", "must be at least 1");
  if (embed_dim == 0) throw ConfigError("embed_dim", "must be at least 1");
  if (window == 0) throw ConfigError("window", "must be at least 1");
  if (horizon == 0) throw ConfigError("horizon", "must be at least 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau", "must be a finite value > 0");
  if (hidden_init == HiddenInit::gaussian && !(hidden_sigma > 0.0)) {
    throw ConfigError("hidden_sigma", "must be > 0 for gaussian hidden init");
  }
}

ModelConfig configure_baseline(ModelConfig base, BaselineKind kind) {
  base.use_gumbel = true;
  base.use_maa = true;
  switch (kind) {
  case BaselineKind::persistence: base.kind = ModelKind::persistence; break;
  case BaselineKind::gcn_tcn: base.kind = ModelKind::gcn_tcn; break;
  case BaselineKind::gcn_lstm: base.kind = ModelKind::gcn_lstm; break;
  case BaselineKind::gcn_gru: base.kind = ModelKind::gcn_gru; break;
  case BaselineKind::stlgru_no_maa:
    base.kind = ModelKind::stlgru;
    base.use_maa = false;
    break;
  case BaselineKind::stlgru_no_gumbel:
    base.kind = ModelKind::stlgru;
    base.use_gumbel = false;
    break;
  case BaselineKind::stlgru_no_both:
    base.kind = ModelKind::stlgru;
    base.use_gumbel = false;
    base.use_maa = false;
    break;
  }
  return base;
}

std::string_view to_string(ModelKind k) {
  switch (k) {
  case ModelKind::stlgru: return "stlgru";
  case ModelKind::gcn_gru: return "gcn_gru";
  case ModelKind::gcn_lstm: return "gcn_lstm";
  case ModelKind::gcn_tcn: return "gcn_tcn";
  case ModelKind::persistence: return "persistence";
  }
  return "?";
}

std::string_view to_string(AttentionAxis a) {
  return a == AttentionAxis::feature ? "feature" : "node";
}

std::string_view to_string(HiddenInit h) { return h == HiddenInit::zeros ? "zeros" : "gaussian"; }

std::string_view to_string(BaselineKind k) {
  switch (k) {
  case BaselineKind::persistence: return "persistence";
  case BaselineKind::gcn_tcn: return "gcn_tcn";
  case BaselineKind::gcn_lstm: return "gcn_lstm";
  case BaselineKind::gcn_gru: return "gcn_gru";
  case BaselineKind::stlgru_no_maa: return "stlgru_no_maa";
  case BaselineKind::stlgru_no_gumbel: return "stlgru_no_gumbel";
  case BaselineKind::stlgru_no_both: return "stlgru_no_both";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::stlgru, ModelKind::gcn_gru, ModelKind::gcn_lstm, ModelKind::gcn_tcn,
                 ModelKind::persistence})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<AttentionAxis> parse_attention_axis(std::string_view s) {
  if (s == "feature") return AttentionAxis::feature;
  if (s == "node") return AttentionAxis::node;
  return std::nullopt;
}

std::optional<HiddenInit> parse_hidden_init(std::string_view s) {
  if (s == "zeros") return HiddenInit::zeros;
  if (s == "gaussian") return HiddenInit::gaussian;
  return std::nullopt;
}

} // namespace stlgru
