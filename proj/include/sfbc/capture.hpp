#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sfbc/harness.hpp"

namespace sfbc {

// Sidecar metadata of an IQ capture.
struct IqMetadata {
  int version = 1;
  int subcarriers = 512;
  int cp = 10;
  int symbols = 20;
  int rx_antennas = 2;
  std::string sample_format = "cf32_le";

  std::size_t samples_per_antenna() const {
    return static_cast<std::size_t>(symbols) * (subcarriers + cp);
  }
  std::string to_json() const;
  static IqMetadata from_json(const std::string& text);
};

// Path of the metadata sidecar for a capture file.
std::string metadata_path(const std::string& capture_path);

// Writes little-endian float32 interleaved I/Q, antennas one after another,
// plus the JSON sidecar.
void write_capture(const std::string& path, const TimeFrame& frame, const IqMetadata& meta);

struct IqCapture {
  IqMetadata meta;
  TimeFrame frame;
};

// Throws IngestionError (with the offending byte offset) on malformed data.
IqCapture read_capture(const std::string& path);

struct CaptureReport {
  std::optional<CodeId> ht;
  std::optional<CodeId> svm;
  std::optional<double> u;
  std::optional<double> t;
  double threshold = 0.0;
  TreeTrace ht_trace, svm_trace;
};

// Classifies a capture with the config's algorithm(s); N, nu, N_b and N_r
// come from the capture metadata.
CaptureReport classify_capture(const std::string& path, const ExperimentConfig& cfg,
                               const Classifiers& cls = {});

}  // namespace sfbc
