#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "stlgru/checkpoint.hpp"
#include "stlgru/series.hpp"
#include "stlgru/synthetic.hpp"
#include "stlgru/trainer.hpp"

using namespace stlgru;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "stlgru_tests";
  fs::create_directories(dir);
  return dir / name;
}

double correlation(const SeriesTensor& s, std::size_t a, std::size_t b) {
  const std::size_t n = s.n_steps();
  double ma = 0, mb = 0;
  for (std::size_t t = 0; t < n; ++t) {
    ma += s.at(t, a);
    mb += s.at(t, b);
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double x = s.at(t, a) - ma, y = s.at(t, b) - mb;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("STSF round trip is bit-exact") {
  SeriesTensor s(3, 5, 1);
  std::mt19937_64 rng(70);
  std::normal_distribution<double> normal(0.0, 1e3);
  for (double& v : s.values()) v = normal(rng);
  SeriesMetadata meta;
  meta.name = "demo";
  meta.interval_minutes = 5.0;
  meta.provenance = R"({"seed":3})";
  const auto path = scratch("roundtrip.stsf");
  save_series(s, path, StorageType::f64le, meta);
  const LoadedSeries back = load_series(path);
  CHECK(back.series == s);
  CHECK(back.dtype == StorageType::f64le);
  CHECK(back.meta.name == "demo");
  CHECK(back.meta.interval_minutes == 5.0);
  CHECK(back.meta.provenance == R"({"seed":3})");

  SeriesTensor f(2, 4, 2);
  for (std::size_t i = 0; i < f.values().size(); ++i) f.values()[i] = 0.25 * i - 1.0;
  CHECK(decode_series(encode_series(f, StorageType::f32le)).series == f);
}

TEST_CASE("STSF stores time-major little-endian values") {
  SeriesTensor s(2, 2);
  s.at(0, 0) = 1.0;
  s.at(0, 1) = 2.0;
  s.at(1, 0) = 3.0;
  s.at(1, 1) = 4.0;
  const auto bytes = encode_series(s, StorageType::f64le);
  REQUIRE(bytes.size() > 32);
  CHECK(std::memcmp(bytes.data(), "STSF0001", 8) == 0);
  const std::size_t payload = bytes.size() - 32;
  double second = 0.0;
  std::memcpy(&second, bytes.data() + payload + 8, 8);
  CHECK(second == 2.0);
}

TEST_CASE("STSF rejects malformed containers") {
  SeriesTensor s(3, 5);
  auto bytes = encode_series(s, StorageType::f64le);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 8);
  try {
    decode_series(truncated);
    FAIL("truncated payload accepted");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("expected 120 bytes, found 112") != std::string::npos);
  }

  auto longer = bytes;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_series(longer), FormatError);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_series(magic), FormatError);

  auto nan = bytes;
  const double q = std::nan("");
  std::memcpy(nan.data() + nan.size() - 8, &q, 8);
  CHECK_THROWS_AS(decode_series(nan), FormatError);

  CHECK_THROWS_AS(decode_series({}), FormatError);
  CHECK_THROWS(load_series(scratch("does_not_exist.stsf")));
}

TEST_CASE("PeMSD8-shaped file") {
  SeriesTensor s(170, 17856);
  for (std::size_t i = 0; i < s.values().size(); ++i) s.values()[i] = static_cast<double>(i % 977);
  const auto path = scratch("pemsd8.stsf");
  save_series(s, path, StorageType::f32le);
  const LoadedSeries back = load_series(path);
  CHECK(back.series.n_nodes() == 170);
  CHECK(back.series.n_steps() == 17856);
  CHECK(back.series.n_channels() == 1);
  CHECK(back.dtype == StorageType::f32le);
  CHECK(fs::file_size(path) > 170u * 17856u * 4u);
  CHECK(back.series.at(17855, 169) == s.at(17855, 169));
  fs::remove(path);
}

TEST_CASE("synthetic series without noise or coupling is periodic") {
  SyntheticSpec spec;
  spec.n_nodes = 5;
  spec.n_steps = 300;
  spec.alpha = 0.0;
  spec.noise_sigma = 0.0;
  spec.periods = {25.0};
  const auto data = generate_synthetic(spec);
  for (std::size_t t = 0; t + 25 < spec.n_steps; ++t)
    for (std::size_t n = 0; n < spec.n_nodes; ++n)
      CHECK(std::abs(data.series.at(t + 25, n) - data.series.at(t, n)) <= 1e-9);
}

TEST_CASE("uncoupled synthetic nodes are uncorrelated on average") {
  SyntheticSpec spec;
  spec.n_nodes = 50;
  spec.n_steps = 1000;
  spec.alpha = 0.0;
  const auto data = generate_synthetic(spec);
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < spec.n_nodes; ++a)
    for (std::size_t b = a + 1; b < spec.n_nodes; ++b) {
      total += correlation(data.series, a, b);
      ++pairs;
    }
  CHECK(std::abs(total / pairs) <= 0.05);
}

TEST_CASE("neighbours correlate more than non-neighbours") {
  const auto data = generate_synthetic(SyntheticSpec{});
  double near = 0.0, far = 0.0;
  std::size_t n_near = 0, n_far = 0;
  for (std::size_t a = 0; a < data.adjacency.rows(); ++a)
    for (std::size_t b = a + 1; b < data.adjacency.rows(); ++b) {
      const double c = correlation(data.series, a, b);
      if (data.adjacency(a, b) != 0.0) {
        near += c;
        ++n_near;
      } else {
        far += c;
        ++n_far;
      }
    }
  REQUIRE(n_near > 0);
  REQUIRE(n_far > 0);
  CHECK(near / n_near > far / n_far);
}

TEST_CASE("synthetic generator is deterministic and well formed") {
  SyntheticSpec spec;
  spec.n_nodes = 12;
  spec.n_steps = 400;
  const auto a = generate_synthetic(spec), b = generate_synthetic(spec);
  CHECK(a.series == b.series);
  CHECK(a.adjacency == b.adjacency);
  CHECK(is_connected(a.adjacency));
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(a.adjacency(i, i) == 0.0);
    for (std::size_t j = 0; j < 12; ++j) CHECK(a.adjacency(i, j) == a.adjacency(j, i));
  }
  for (double v : a.series.values()) CHECK(std::isfinite(v));
  for (std::size_t n = 0; n < 12; ++n) {
    double lo = a.series.at(0, n), hi = lo;
    for (std::size_t t = 0; t < 400; ++t) {
      lo = std::min(lo, a.series.at(t, n));
      hi = std::max(hi, a.series.at(t, n));
    }
    CHECK(hi > lo);
  }
  spec.signal_seed += 1;
  CHECK_FALSE(generate_synthetic(spec).series == a.series);
}

TEST_CASE("synthetic generator settings validation") {
  SyntheticSpec s;
  s.alpha = 1.0;
  CHECK_THROWS(s.validate());
  s = SyntheticSpec{};
  s.periods = {1.0};
  CHECK_THROWS(s.validate());
  s = SyntheticSpec{};
  s.n_nodes = 0;
  CHECK_THROWS(s.validate());
  CHECK_THROWS_AS(random_connected_graph(30, 0.0, 1, 5), GenerationError);
}

TEST_CASE("checkpoint round trip") {
  SyntheticSpec spec;
  spec.n_nodes = 5;
  spec.n_steps = 480;
  const auto data = generate_synthetic(spec).series;
  Checkpoint ck;
  ck.model.n_nodes = 5;
  ck.model.hidden_dim = 6;
  ck.model.embed_dim = 2;
  ck.model.attention_axis = AttentionAxis::node;
  ck.train.epochs = 2;
  ck.train.seed = 99;
  const TrainResult fit = train(ck.model, data, ck.train);
  ck.params = fit.params;
  ck.stats = fit.stats;
  ck.history = fit.history;
  ck.history.push_back({7, 0.5, 0.25, std::nan(""), 1});
  ck.best_epoch = fit.best_epoch;
  ck.run_config = {{"command", "train"}};

  const auto path = scratch("ckpt.json");
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.model.attention_axis == AttentionAxis::node);
  CHECK(back.model.hidden_dim == 6);
  CHECK(back.train.seed == 99);
  CHECK(back.stats.mean == ck.stats.mean);
  CHECK(back.stats.std == ck.stats.std);
  CHECK(back.best_epoch == ck.best_epoch);
  REQUIRE(back.history.size() == ck.history.size());
  CHECK(back.history[0].train_loss == ck.history[0].train_loss);
  CHECK(std::isnan(back.history.back().val_mae));
  REQUIRE(back.params.size() == ck.params.size());
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    CHECK(back.params.entries()[i].name == ck.params.entries()[i].name);
    CHECK(back.params.entries()[i].value == ck.params.entries()[i].value);
  }
  CHECK(back.run_config["command"] == "train");

  std::ofstream(scratch("junk.json")) << R"({"format":"other"})";
  CHECK_THROWS_AS(load_checkpoint(scratch("junk.json")), FormatError);
  std::ofstream(scratch("broken.json")) << "{";
  CHECK_THROWS_AS(load_checkpoint(scratch("broken.json")), FormatError);
}
