#include "sfbc/txchain.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "sfbc/dft.hpp"
#include "sfbc/errors.hpp"

namespace sfbc {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

bool is_supported(const ModulationScheme& s) {
  if (s.family == ModFamily::psk) {
    return s.order == 2 || s.order == 4 || s.order == 8 || s.order == 16;
  }
  return s.order == 4 || s.order == 16 || s.order == 64;
}

}  // namespace

std::vector<cplx> ModulationScheme::constellation() const {
  if (!is_supported(*this)) throw ConfigError("unsupported modulation " + name());
  std::vector<cplx> points;
  points.reserve(order);
  if (family == ModFamily::psk) {
    // QPSK sits on the diagonals, every other PSK starts at phase 0.
    const double offset = order == 4 ? std::numbers::pi / 4.0 : 0.0;
    for (int m = 0; m < order; ++m) {
      points.push_back(std::polar(1.0, offset + 2.0 * std::numbers::pi * m / order));
    }
    return points;
  }
  const int side = static_cast<int>(std::lround(std::sqrt(order)));
  const double norm = std::sqrt(2.0 * (order - 1) / 3.0);
  for (int i = 0; i < side; ++i) {
    for (int q = 0; q < side; ++q) {
      points.emplace_back((2 * i - side + 1) / norm, (2 * q - side + 1) / norm);
    }
  }
  return points;
}

std::string ModulationScheme::name() const {
  if (family == ModFamily::psk) {
    if (order == 2) return "BPSK";
    if (order == 4) return "QPSK";
    return std::to_string(order) + "PSK";
  }
  return std::to_string(order) + "QAM";
}

ModulationScheme ModulationScheme::parse(const std::string& name) {
  if (name == "BPSK") return {ModFamily::psk, 2};
  if (name == "QPSK") return {ModFamily::psk, 4};
  ModulationScheme s;
  std::size_t pos = 0;
  int order = 0;
  try {
    order = std::stoi(name, &pos);
  } catch (const std::exception&) {
    throw ConfigError("unknown modulation '" + name + "'");
  }
  const std::string family = name.substr(pos);
  if (family == "PSK") {
    s = {ModFamily::psk, order};
  } else if (family == "QAM") {
    s = {ModFamily::qam, order};
  } else {
    throw ConfigError("unknown modulation '" + name + "'");
  }
  if (!is_supported(s)) throw ConfigError("unsupported modulation '" + name + "'");
  return s;
}

std::string to_string(CodeId code) {
  switch (code) {
    case CodeId::sm: return "SM";
    case CodeId::al: return "AL";
    case CodeId::sfbc1: return "SFBC1";
    case CodeId::sfbc2: return "SFBC2";
  }
  return "?";
}

CodeId parse_code(const std::string& name) {
  if (name == "SM") return CodeId::sm;
  if (name == "AL") return CodeId::al;
  if (name == "SFBC1") return CodeId::sfbc1;
  if (name == "SFBC2") return CodeId::sfbc2;
  throw ConfigError("unknown code '" + name + "'");
}

CodeShape code_shape(CodeId code, int sm_antennas) {
  switch (code) {
    case CodeId::sm:
      if (sm_antennas < 1) throw ConfigError("SM needs at least one transmit antenna");
      return {sm_antennas, 1, sm_antennas};
    case CodeId::al: return {2, 2, 2};
    case CodeId::sfbc1: return {3, 8, 4};
    case CodeId::sfbc2: return {3, 4, 3};
  }
  throw ConfigError("unknown code");
}

double unit_power_scale(CodeId code, int sm_antennas, double total_power) {
  // Average per-sub-carrier codeword energy for unit-energy circular symbols.
  double energy = 0.0;
  switch (code) {
    case CodeId::sm: energy = sm_antennas; break;
    case CodeId::al: energy = 2.0; break;
    case CodeId::sfbc1: energy = 3.0; break;
    case CodeId::sfbc2: energy = 2.25; break;
  }
  return std::sqrt(total_power / energy);
}

std::vector<cplx> map_symbols(CounterRng& rng, const ModulationScheme& scheme, std::size_t count) {
  const auto points = scheme.constellation();
  const int bits = std::countr_zero(static_cast<unsigned>(scheme.order));
  std::vector<cplx> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(points[rng() >> (64 - bits)]);
  }
  return out;
}

CodewordMatrix encode(CodeId code, std::span<const cplx> block, double power_scale,
                      int sm_antennas) {
  const CodeShape shape = code_shape(code, sm_antennas);
  if (static_cast<int>(block.size()) != shape.block_symbols) {
    throw EncodeError("block length " + std::to_string(block.size()) + " does not match " +
                      to_string(code) + " (" + std::to_string(shape.block_symbols) + ")");
  }
  CodewordMatrix c(shape.tx_antennas, shape.length);
  auto x = [&](int i) { return power_scale * block[i]; };
  auto xc = [&](int i) { return std::conj(x(i)); };

  switch (code) {
    case CodeId::sm:
      for (int a = 0; a < shape.tx_antennas; ++a) c(a, 0) = x(a);
      break;
    case CodeId::al:
      c(0, 0) = x(0);
      c(1, 0) = x(1);
      c(0, 1) = -xc(1);
      c(1, 1) = xc(0);
      break;
    case CodeId::sfbc1: {
      // Sub-carriers 1-4; 5-8 repeat them conjugated.
      const cplx cols[4][3] = {{x(0), x(1), x(2)},
                               {-x(1), x(0), -x(3)},
                               {-x(2), x(3), x(0)},
                               {-x(3), -x(2), x(1)}};
      for (int s = 0; s < 4; ++s) {
        for (int a = 0; a < 3; ++a) {
          c(a, s) = cols[s][a];
          c(a, s + 4) = std::conj(cols[s][a]);
        }
      }
      break;
    }
    case CodeId::sfbc2: {
      const cplx x2 = x(2) * kInvSqrt2;
      const cplx x2c = xc(2) * kInvSqrt2;
      c(0, 0) = x(0);
      c(1, 0) = x(1);
      c(2, 0) = x2;
      c(0, 1) = -xc(1);
      c(1, 1) = xc(0);
      c(2, 1) = x2;
      c(0, 2) = x2c;
      c(1, 2) = x2c;
      c(2, 2) = (-x(0) - xc(0) + x(1) - xc(1)) * 0.5;
      c(0, 3) = x2c;
      c(1, 3) = -x2c;
      c(2, 3) = (x(1) + xc(1) + x(0) - xc(0)) * 0.5;
      break;
    }
  }
  return c;
}

ResourceGrid assemble_grid(CodeId code, std::span<const cplx> blocks, int subcarriers,
                           int ofdm_symbols, double power_scale, int sm_antennas) {
  const CodeShape shape = code_shape(code, sm_antennas);
  if (subcarriers <= 0 || ofdm_symbols <= 0) throw ConfigError("grid dimensions must be positive");
  if (subcarriers % shape.length != 0) {
    throw ConfigError("N=" + std::to_string(subcarriers) + " is not divisible by L=" +
                      std::to_string(shape.length) + " for " + to_string(code));
  }
  const int per_symbol = subcarriers / shape.length;
  const std::size_t expected =
      static_cast<std::size_t>(ofdm_symbols) * per_symbol * shape.block_symbols;
  if (blocks.size() != expected) {
    throw ConfigError("assemble_grid: expected " + std::to_string(expected) + " symbols, got " +
                      std::to_string(blocks.size()));
  }
  ResourceGrid grid(shape.tx_antennas, subcarriers, ofdm_symbols);
  std::size_t offset = 0;
  for (int n = 0; n < ofdm_symbols; ++n) {
    for (int cw = 0; cw < per_symbol; ++cw) {
      const auto c = encode(code, blocks.subspan(offset, shape.block_symbols), power_scale,
                            sm_antennas);
      offset += shape.block_symbols;
      for (int col = 0; col < shape.length; ++col) {
        for (int a = 0; a < shape.tx_antennas; ++a) {
          grid(a, cw * shape.length + col, n) = c(a, col);
        }
      }
    }
  }
  return grid;
}

std::vector<cplx> disassemble_grid(CodeId code, const ResourceGrid& grid, double power_scale,
                                   int sm_antennas) {
  const CodeShape shape = code_shape(code, sm_antennas);
  const int per_symbol = grid.subcarriers() / shape.length;
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(grid.symbols()) * per_symbol * shape.block_symbols);
  for (int n = 0; n < grid.symbols(); ++n) {
    for (int cw = 0; cw < per_symbol; ++cw) {
      const int k0 = cw * shape.length;
      auto at = [&](int a, int col) { return grid(a, k0 + col, n) / power_scale; };
      switch (code) {
        case CodeId::sm:
          for (int a = 0; a < shape.tx_antennas; ++a) out.push_back(at(a, 0));
          break;
        case CodeId::al:
          out.push_back(at(0, 0));
          out.push_back(at(1, 0));
          break;
        case CodeId::sfbc1:
          out.push_back(at(0, 0));
          out.push_back(at(1, 0));
          out.push_back(at(2, 0));
          out.push_back(-at(2, 1));
          break;
        case CodeId::sfbc2:
          out.push_back(at(0, 0));
          out.push_back(at(1, 0));
          out.push_back(at(2, 0) / kInvSqrt2);
          break;
      }
    }
  }
  return out;
}

TimeFrame ofdm_modulate(const ResourceGrid& grid, int cp) {
  const int n_fft = grid.subcarriers();
  if (cp < 0 || cp > n_fft) throw ConfigError("cyclic prefix length must lie in [0, N]");
  const std::size_t sym_len = static_cast<std::size_t>(n_fft) + cp;
  TimeFrame frame(grid.antennas(), sym_len * grid.symbols());
  std::vector<cplx> freq(n_fft), time(n_fft);
  for (int a = 0; a < grid.antennas(); ++a) {
    auto stream = frame.antenna(a);
    for (int n = 0; n < grid.symbols(); ++n) {
      for (int k = 0; k < n_fft; ++k) freq[k] = grid(a, k, n);
      unitary_idft(freq, time);
      cplx* dst = stream.data() + n * sym_len;
      for (int i = 0; i < cp; ++i) dst[i] = time[n_fft - cp + i];
      for (int i = 0; i < n_fft; ++i) dst[cp + i] = time[i];
    }
  }
  return frame;
}

}  // namespace sfbc
