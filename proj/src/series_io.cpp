#include "stlgru/series.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <json.hpp>

namespace stlgru {
namespace {

constexpr char kMagic[8] = {'S', 'T', 'S', 'F', '0', '0', '0', '1'};

template <typename U>
void put_le(std::vector<unsigned char>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

std::size_t width(StorageType t) { return t == StorageType::f32le ? 4 : 8; }

} // namespace

SeriesTensor::SeriesTensor(std::size_t nodes, std::size_t steps, std::size_t channels)
    : nodes_(nodes), steps_(steps), channels_(channels), values_(nodes * steps * channels, 0.0) {}

SeriesTensor::SeriesTensor(std::size_t nodes, std::size_t steps, std::size_t channels,
                           std::vector<double> values)
    : nodes_(nodes), steps_(steps), channels_(channels), values_(std::move(values)) {
  if (values_.size() != nodes_ * steps_ * channels_) {
    throw std::invalid_argument(fmt::format("series {}x{}x{} needs {} values, got {}", nodes_,
                                            steps_, channels_, nodes_ * steps_ * channels_,
                                            values_.size()));
  }
}

SeriesTensor SeriesTensor::slice_steps(std::size_t begin, std::size_t count) const {
  if (begin + count > steps_) {
    throw std::out_of_range(fmt::format("steps [{}, {}) outside series of {} steps", begin,
                                        begin + count, steps_));
  }
  const std::size_t stride = nodes_ * channels_;
  std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                        values_.begin() + static_cast<std::ptrdiff_t>((begin + count) * stride));
  return SeriesTensor(nodes_, count, channels_, std::move(v));
}

std::vector<unsigned char> encode_series(const SeriesTensor& series, StorageType dtype,
                                         const SeriesMetadata& meta) {
  nlohmann::ordered_json header;
  header["nodes"] = series.n_nodes();
  header["steps"] = series.n_steps();
  header["channels"] = series.n_channels();
  header["dtype"] = dtype == StorageType::f32le ? "f32le" : "f64le";
  header["layout"] = "time_major";
  if (meta.name) header["name"] = *meta.name;
  if (meta.interval_minutes) header["interval_minutes"] = *meta.interval_minutes;
  if (meta.provenance) header["provenance"] = nlohmann::ordered_json::parse(*meta.provenance);
  const std::string text = header.dump();

  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + series.values().size() * width(dtype));
  for (double v : series.values()) {
    if (dtype == StorageType::f32le) {
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_le(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

LoadedSeries decode_series(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not an STSF file (bad magic)");
  }
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw FormatError(fmt::format("unsupported STSF version '{}'",
                                  std::string(bytes.begin() + 4, bytes.begin() + 8)));
  }
  const auto header_len = get_le<std::uint32_t>(bytes.data() + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len)) {
    throw FormatError(fmt::format("STSF header declares {} bytes but only {} remain", header_len,
                                  bytes.size() - 12));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("STSF header is not valid JSON: ") + e.what());
  }

  LoadedSeries out;
  std::size_t nodes = 0, steps = 0, channels = 0;
  try {
    nodes = header.at("nodes").get<std::size_t>();
    steps = header.at("steps").get<std::size_t>();
    channels = header.at("channels").get<std::size_t>();
    const auto dtype = header.at("dtype").get<std::string>();
    if (dtype == "f32le") {
      out.dtype = StorageType::f32le;
    } else if (dtype == "f64le") {
      out.dtype = StorageType::f64le;
    } else {
      throw FormatError("unsupported STSF dtype '" + dtype + "'");
    }
    const auto layout = header.at("layout").get<std::string>();
    if (layout != "time_major") throw FormatError("unsupported STSF layout '" + layout + "'");
    if (header.contains("name")) out.meta.name = header["name"].get<std::string>();
    if (header.contains("interval_minutes"))
      out.meta.interval_minutes = header["interval_minutes"].get<double>();
    if (header.contains("provenance")) out.meta.provenance = header["provenance"].dump();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("STSF header missing or mistyped key: ") + e.what());
  }

  const std::size_t count = nodes * steps * channels;
  const std::size_t expected = count * width(out.dtype);
  const std::size_t actual = bytes.size() - 12 - header_len;
  if (expected != actual) {
    throw FormatError(fmt::format("STSF payload size mismatch: expected {} bytes, found {}",
                                  expected, actual));
  }
  std::vector<double> values(count);
  const unsigned char* p = bytes.data() + 12 + header_len;
  for (std::size_t i = 0; i < count; ++i) {
    if (out.dtype == StorageType::f32le) {
      values[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
    } else {
      values[i] = std::bit_cast<double>(get_le<std::uint64_t>(p + 8 * i));
    }
    if (!std::isfinite(values[i])) {
      throw FormatError(fmt::format("STSF payload value {} is not finite", i));
    }
  }
  out.series = SeriesTensor(nodes, steps, channels, std::move(values));
  return out;
}

void save_series(const SeriesTensor& series, const std::filesystem::path& path,
                 StorageType dtype, const SeriesMetadata& meta) {
  const auto bytes = encode_series(series, dtype, meta);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

LoadedSeries load_series(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return decode_series(bytes);
}

} // namespace stlgru
