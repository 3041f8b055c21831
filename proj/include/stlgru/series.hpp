#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlgru {

/// Node-by-time-by-channel traffic values in time-major order (step, node, channel).
class SeriesTensor {
public:
  SeriesTensor() = default;
  SeriesTensor(std::size_t nodes, std::size_t steps, std::size_t channels = 1);
  SeriesTensor(std::size_t nodes, std::size_t steps, std::size_t channels,
               std::vector<double> values);

  std::size_t n_nodes() const { return nodes_; }
  std::size_t n_steps() const { return steps_; }
  std::size_t n_channels() const { return channels_; }

  double& at(std::size_t step, std::size_t node, std::size_t channel = 0) {
    return values_[(step * nodes_ + node) * channels_ + channel];
  }
  double at(std::size_t step, std::size_t node, std::size_t channel = 0) const {
    return values_[(step * nodes_ + node) * channels_ + channel];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Steps [begin, begin + count) as a new tensor.
  SeriesTensor slice_steps(std::size_t begin, std::size_t count) const;

  friend bool operator==(const SeriesTensor&, const SeriesTensor&) = default;

private:
  std::size_t nodes_ = 0;
  std::size_t steps_ = 0;
  std::size_t channels_ = 1;
  std::vector<double> values_;
};

/// Malformed STSF container.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class StorageType { f32le, f64le };

struct SeriesMetadata {
  std::optional<std::string> name;
  std::optional<double> interval_minutes;
  /// Serialized JSON object describing how the file was produced.
  std::optional<std::string> provenance;
};

struct LoadedSeries {
  SeriesTensor series;
  StorageType dtype = StorageType::f64le;
  SeriesMetadata meta;
};

/// STSF layout: "STSF0001", u32le header length, JSON header, raw payload.
void save_series(const SeriesTensor& series, const std::filesystem::path& path,
                 StorageType dtype = StorageType::f64le, const SeriesMetadata& meta = {});
std::vector<unsigned char> encode_series(const SeriesTensor& series, StorageType dtype,
                                         const SeriesMetadata& meta = {});

LoadedSeries load_series(const std::filesystem::path& path);
LoadedSeries decode_series(const std::vector<unsigned char>& bytes);

} // namespace stlgru
