#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "stlgru/metrics.hpp"
#include "stlgru/model.hpp"

using namespace stlgru;

TEST_CASE("metric triples") {
  const std::vector<double> truth{1, 2, 3}, pred{2, 2, 5};
  const auto e = compute_metrics(pred, truth, 0.0);
  CHECK(std::abs(e.mae - 1.0) <= 1e-12);
  CHECK(std::abs(e.rmse - std::sqrt(5.0 / 3.0)) <= 1e-12);
  CHECK(e.n_evaluated == 3);

  const std::vector<double> t2{1, 2}, p2{2, 2};
  CHECK(std::abs(compute_metrics(p2, t2, 0.0).mape - 50.0) <= 1e-12);

  const auto perfect = compute_metrics(truth, truth);
  CHECK(perfect.mae == 0.0);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.mape == 0.0);
}

TEST_CASE("MAPE skips targets at or below the floor") {
  const std::vector<double> truth{0.0, 1.0, 10.0}, pred{5.0, 2.0, 12.0};
  const auto e = compute_metrics(pred, truth);
  CHECK(e.masked_count == 2);
  CHECK(e.mape == doctest::Approx(20.0));
  CHECK(e.mae == doctest::Approx(8.0 / 3.0));
  CHECK_THROWS(compute_metrics(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("MAE never exceeds RMSE and metrics ignore ordering") {
  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> u(-50.0, 300.0);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = len(rng);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
    }
    const auto e = compute_metrics(a, b);
    CHECK(e.mae <= e.rmse * (1.0 + 1e-12));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> pa, pb;
    for (std::size_t i : order) {
      pa.push_back(a[i]);
      pb.push_back(b[i]);
    }
    const auto p = compute_metrics(pa, pb);
    CHECK(p.mae == doctest::Approx(e.mae).epsilon(1e-12));
    CHECK(p.rmse == doctest::Approx(e.rmse).epsilon(1e-12));
    CHECK(p.mape == doctest::Approx(e.mape).epsilon(1e-12));
  }
}

TEST_CASE("merging parts equals scoring the concatenation") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a, b;
    std::vector<ErrorSummary> parts;
    for (int k = 0; k < 4; ++k) {
      std::vector<double> pa(1 + trial % 7 + k), pb(pa.size());
      for (std::size_t i = 0; i < pa.size(); ++i) {
        pa[i] = u(rng);
        pb[i] = u(rng);
      }
      parts.push_back(compute_metrics(pa, pb));
      a.insert(a.end(), pa.begin(), pa.end());
      b.insert(b.end(), pb.begin(), pb.end());
    }
    const auto whole = compute_metrics(a, b);
    const auto merged = merge(parts);
    CHECK(merged.mae == doctest::Approx(whole.mae).epsilon(1e-12));
    CHECK(merged.rmse == doctest::Approx(whole.rmse).epsilon(1e-12));
    CHECK(merged.mape == doctest::Approx(whole.mape).epsilon(1e-12));
    CHECK(merged.n_evaluated == whole.n_evaluated);
    CHECK(merged.masked_count == whole.masked_count);
  }
}

TEST_CASE("horizon report columns") {
  const Matrix truth{{10, 20, 30}, {10, 20, 30}};
  const Matrix pred{{11, 20, 33}, {9, 22, 30}};
  const std::vector<std::size_t> hs{1, 3};
  const auto r = horizon_report(pred, truth, hs);
  REQUIRE(r.horizons.size() == 2);
  CHECK(r.horizons[0].horizon == 1);
  CHECK(r.horizons[0].errors.mae == 1.0);
  CHECK(r.horizons[1].errors.mae == 1.5);
  CHECK(r.average.mae == doctest::Approx(7.0 / 6.0));
  const std::vector<std::size_t> bad{4};
  CHECK_THROWS(horizon_report(pred, truth, bad));
}

TEST_CASE("parameter count of the small example") {
  ModelConfig c;
  c.n_nodes = 5;
  c.embed_dim = 2;
  c.hidden_dim = 4;
  c.horizon = 3;
  CHECK(count_parameters(c).parameter_count == 177);
  CHECK(Model(c, 0).params().scalar_count() == 177);
  c.hidden_dim = 0;
  CHECK_THROWS_AS(count_parameters(c), ConfigError);
}

TEST_CASE("analytic parameter count equals the live tensors") {
  std::mt19937_64 rng(62);
  std::uniform_int_distribution<std::size_t> small(1, 12);
  std::uniform_int_distribution<int> kind(0, 3), flag(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    ModelConfig c;
    c.kind = static_cast<ModelKind>(kind(rng));
    c.n_nodes = small(rng);
    c.in_channels = small(rng) % 3 + 1;
    c.hidden_dim = small(rng);
    c.embed_dim = small(rng);
    c.window = small(rng);
    c.horizon = small(rng);
    c.use_gumbel = flag(rng) == 1;
    c.use_maa = flag(rng) == 1;
    const auto report = count_parameters(c);
    CHECK(report.parameter_count == Model(c, 1).params().scalar_count());
    std::size_t sum = 0;
    for (const auto& [name, n] : report.parameter_breakdown) sum += n;
    CHECK(sum == report.parameter_count);
  }
}

TEST_CASE("FLOPs of the unit configuration") {
  ModelConfig c;
  c.n_nodes = 1;
  c.hidden_dim = 1;
  c.window = 1;
  c.horizon = 1;
  const auto f = estimate_flops(c, 1);
  const auto& b = f.flop_breakdown;
  CHECK(b.at("gcn") == 4);
  CHECK(b.at("maa_scores") + b.at("maa_softmax") + b.at("maa_gating") == 18);
  CHECK(b.at("gate_matmuls") + b.at("gate_elementwise") == 22);
  CHECK(b.at("head_fc1") + b.at("head_fc2") == 4);
  CHECK(f.flops_per_window == 48);

  c.use_maa = false;
  CHECK(estimate_flops(c, 1).flops_per_window == 30);
  c.kind = ModelKind::gcn_gru;
  CHECK_THROWS(estimate_flops(c, 1));
}

TEST_CASE("gate FLOPs grow with the square of the hidden width") {
  ModelConfig c;
  c.n_nodes = 7;
  c.window = 5;
  for (std::size_t width : {3, 8, 64}) {
    c.hidden_dim = width;
    const auto one = estimate_flops(c, c.window).flop_breakdown.at("gate_matmuls");
    c.hidden_dim = 2 * width;
    const auto two = estimate_flops(c, c.window).flop_breakdown.at("gate_matmuls");
    CHECK(two == 4 * one);
  }
}

TEST_CASE("PeMSD4-shaped accounting") {
  ModelConfig c;
  c.n_nodes = 307;
  const auto r = cost_report(c);
  CHECK(r.parameter_count == Model(c, 0).params().scalar_count());
  CHECK(r.flops_per_window > 0);
  MESSAGE("parameters ", r.parameter_count, " vs 348.54K reference; FLOPs ", r.flops_per_window,
          " vs 77.93G reference");
}
