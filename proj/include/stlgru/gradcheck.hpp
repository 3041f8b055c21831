#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stlgru/config.hpp"

namespace stlgru {

struct TensorGradCheck {
  std::string name;
  std::size_t size = 0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  ModelConfig config;
  std::vector<TensorGradCheck> tensors;
  double max_relative_error = 0.0;
  double loss = 0.0;
};

/// N=5, d=3, C'=8, T=6, T'=4, one input channel.
ModelConfig toy_gradcheck_config();

/// Compares reverse-mode gradients of loss∘forecast against central
/// differences on random data with frozen Gumbel noise. Everything is
/// derived from `seed`.
GradCheckReport run_gradient_check(const ModelConfig& cfg, std::uint64_t seed, double eps = 1e-5,
                                   std::size_t batch = 2);

} // namespace stlgru
