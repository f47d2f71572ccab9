#include "sfbc/capture.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sfbc/errors.hpp"

namespace sfbc {

using nlohmann::json;

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void put_f32(char* dst, float f) {
  std::uint32_t u = to_le(std::bit_cast<std::uint32_t>(f));
  std::memcpy(dst, &u, 4);
}

float get_f32(const char* src) {
  std::uint32_t u;
  std::memcpy(&u, src, 4);
  return std::bit_cast<float>(to_le(u));
}

std::string slurp(const std::string& path, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IngestionError(std::string("cannot open ") + what + " " + path, 0);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

std::string IqMetadata::to_json() const {
  json j{{"version", version}, {"N", subcarriers},  {"nu", cp},
         {"N_b", symbols},     {"N_r", rx_antennas}, {"sample_format", sample_format}};
  return j.dump(2);
}

IqMetadata IqMetadata::from_json(const std::string& text) {
  IqMetadata m;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestionError(std::string("malformed metadata: ") + e.what(), e.byte);
  }
  try {
    m.version = j.at("version").get<int>();
    m.subcarriers = j.at("N").get<int>();
    m.cp = j.at("nu").get<int>();
    m.symbols = j.at("N_b").get<int>();
    m.rx_antennas = j.at("N_r").get<int>();
    m.sample_format = j.at("sample_format").get<std::string>();
  } catch (const json::exception& e) {
    throw IngestionError(std::string("incomplete metadata: ") + e.what(), 0);
  }
  if (m.version != 1) throw IngestionError("unsupported capture version", 0);
  if (m.sample_format != "cf32_le") throw IngestionError("unsupported sample format", 0);
  if (m.subcarriers < 1 || m.cp < 0 || m.symbols < 1 || m.rx_antennas < 1)
    throw IngestionError("metadata dimensions out of range", 0);
  return m;
}

std::string metadata_path(const std::string& capture_path) { return capture_path + ".json"; }

void write_capture(const std::string& path, const TimeFrame& frame, const IqMetadata& meta) {
  if (frame.antennas() != meta.rx_antennas || frame.length() != meta.samples_per_antenna())
    throw ConfigError("frame does not match the capture metadata");
  std::string bytes(static_cast<std::size_t>(frame.antennas()) * frame.length() * 8, '\0');
  char* p = bytes.data();
  for (int a = 0; a < frame.antennas(); ++a) {
    for (auto s : frame.antenna(a)) {
      put_f32(p, static_cast<float>(s.real()));
      put_f32(p + 4, static_cast<float>(s.imag()));
      p += 8;
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  std::ofstream m(metadata_path(path));
  if (!m) throw ConfigError("cannot write " + metadata_path(path));
  m << meta.to_json() << '\n';
}

IqCapture read_capture(const std::string& path) {
  auto meta = IqMetadata::from_json(slurp(metadata_path(path), "metadata"));
  const auto bytes = slurp(path, "capture");
  const std::size_t n = meta.samples_per_antenna();
  const std::size_t expected = n * meta.rx_antennas * 8;
  if (bytes.size() < expected)
    throw IngestionError("capture is shorter than its metadata declares", bytes.size());
  if (bytes.size() > expected)
    throw IngestionError("capture has trailing bytes beyond its metadata", expected);
  TimeFrame frame(meta.rx_antennas, n);
  const char* p = bytes.data();
  for (int a = 0; a < meta.rx_antennas; ++a) {
    auto dst = frame.antenna(a);
    for (std::size_t i = 0; i < n; ++i, p += 8) {
      const float re = get_f32(p), im = get_f32(p + 4);
      if (!std::isfinite(re) || !std::isfinite(im))
        throw IngestionError("non-finite sample", static_cast<std::uint64_t>(p - bytes.data()));
      dst[i] = {re, im};
    }
  }
  return {meta, std::move(frame)};
}

CaptureReport classify_capture(const std::string& path, const ExperimentConfig& cfg,
                               const Classifiers& cls) {
  auto cap = read_capture(path);
  ExperimentConfig c = cfg;
  c.subcarriers = cap.meta.subcarriers;
  c.cp = cap.meta.cp;
  c.symbols = cap.meta.symbols;
  c.rx_antennas = cap.meta.rx_antennas;
  if (c.pairs.max_antenna() > c.rx_antennas) c.pairs = AntennaPairSet::all_pairs(c.rx_antennas);
  c.grouping().validate(c.subcarriers);
  auto grid = demodulate(cap.frame, c.subcarriers, c.cp);
  TrialRecord rec;
  classify_grid(c, cls, grid, rec);
  return {rec.ht, rec.svm, rec.u, rec.t, rec.threshold, rec.ht_trace, rec.svm_trace};
}

}  // namespace sfbc
