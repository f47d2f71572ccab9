#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sfbc/rng.hpp"

namespace sfbc {

using cplx = std::complex<double>;

enum class ModFamily { psk, qam };

struct ModulationScheme {
  ModFamily family = ModFamily::psk;
  int order = 4;

  static ModulationScheme qpsk() { return {ModFamily::psk, 4}; }
  static ModulationScheme qam16() { return {ModFamily::qam, 16}; }

  // Unit-energy constellation points; throws ConfigError for unsupported orders.
  std::vector<cplx> constellation() const;
  std::string name() const;
  static ModulationScheme parse(const std::string& name);

  friend bool operator==(const ModulationScheme&, const ModulationScheme&) = default;
};

enum class CodeId { sm, al, sfbc1, sfbc2 };

std::string to_string(CodeId code);
CodeId parse_code(const std::string& name);

// Codeword dimensions: tx antennas N_t, sub-carriers spanned L, symbols per block N_s.
struct CodeShape {
  int tx_antennas;
  int length;
  int block_symbols;
};

// `sm_antennas` only affects SM (default 2).
CodeShape code_shape(CodeId code, int sm_antennas = 2);

// Amplitude scale that makes the codeword's average total transmit power
// per sub-carrier equal `total_power` for unit-energy input symbols.
double unit_power_scale(CodeId code, int sm_antennas = 2, double total_power = 1.0);

// N_t x L complex matrix; entry (a, c) is transmitted from antenna a on the
// c-th sub-carrier of the codeword (both 0-based).
class CodewordMatrix {
 public:
  CodewordMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  cplx& operator()(int a, int c) { return data_[a * cols_ + c]; }
  const cplx& operator()(int a, int c) const { return data_[a * cols_ + c]; }

 private:
  int rows_;
  int cols_;
  std::vector<cplx> data_;
};

// Complex values indexed by (antenna, sub-carrier, OFDM symbol), all 0-based.
// Storage is contiguous along the symbol axis.
class ResourceGrid {
 public:
  ResourceGrid() = default;
  ResourceGrid(int antennas, int subcarriers, int symbols)
      : antennas_(antennas),
        subcarriers_(subcarriers),
        symbols_(symbols),
        data_(static_cast<std::size_t>(antennas) * subcarriers * symbols) {}

  int antennas() const noexcept { return antennas_; }
  int subcarriers() const noexcept { return subcarriers_; }
  int symbols() const noexcept { return symbols_; }

  cplx& operator()(int a, int k, int n) { return data_[index(a, k, n)]; }
  const cplx& operator()(int a, int k, int n) const { return data_[index(a, k, n)]; }

  // All symbols of one (antenna, sub-carrier) cell.
  std::span<const cplx> cell(int a, int k) const {
    return {data_.data() + index(a, k, 0), static_cast<std::size_t>(symbols_)};
  }
  std::span<cplx> cell(int a, int k) {
    return {data_.data() + index(a, k, 0), static_cast<std::size_t>(symbols_)};
  }

  std::span<const cplx> raw() const noexcept { return data_; }
  std::span<cplx> raw() noexcept { return data_; }

 private:
  std::size_t index(int a, int k, int n) const {
    return (static_cast<std::size_t>(a) * subcarriers_ + k) * symbols_ + n;
  }

  int antennas_ = 0;
  int subcarriers_ = 0;
  int symbols_ = 0;
  std::vector<cplx> data_;
};

// Per-antenna serialized sample streams.
class TimeFrame {
 public:
  TimeFrame() = default;
  TimeFrame(int antennas, std::size_t length)
      : antennas_(antennas), length_(length), data_(antennas * length) {}

  int antennas() const noexcept { return antennas_; }
  std::size_t length() const noexcept { return length_; }

  std::span<cplx> antenna(int a) { return {data_.data() + a * length_, length_}; }
  std::span<const cplx> antenna(int a) const { return {data_.data() + a * length_, length_}; }

 private:
  int antennas_ = 0;
  std::size_t length_ = 0;
  std::vector<cplx> data_;
};

// `count` i.i.d. uniform constellation symbols drawn from `rng`.
std::vector<cplx> map_symbols(CounterRng& rng, const ModulationScheme& scheme, std::size_t count);

CodewordMatrix encode(CodeId code, std::span<const cplx> block, double power_scale,
                      int sm_antennas = 2);

// Lays N/L codewords per OFDM symbol across the sub-carriers, symbol by
// symbol. `blocks` holds N_b * N / L blocks of N_s symbols, flattened.
ResourceGrid assemble_grid(CodeId code, std::span<const cplx> blocks, int subcarriers,
                           int ofdm_symbols, double power_scale, int sm_antennas = 2);

// Inverse of assemble_grid for unit power scale; recovers the flattened block sequence.
std::vector<cplx> disassemble_grid(CodeId code, const ResourceGrid& grid, double power_scale,
                                   int sm_antennas = 2);

// Unitary IDFT per (antenna, symbol), then a cyclic prefix of `cp` samples.
TimeFrame ofdm_modulate(const ResourceGrid& grid, int cp);

}  // namespace sfbc
