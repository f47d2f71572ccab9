#include <cmath>
#include <complex>
#include <set>

#include "doctest.h"
#include "sfbc/dft.hpp"
#include "sfbc/errors.hpp"
#include "sfbc/txchain.hpp"

using namespace sfbc;
using doctest::Approx;

namespace {

const cplx I{0.0, 1.0};

std::vector<cplx> random_symbols(std::uint64_t seed, std::size_t n) {
  CounterRng rng(seed);
  std::vector<cplx> v(n);
  for (auto& x : v) x = rng.complex_gaussian(1.0);
  return v;
}

}  // namespace

TEST_CASE("constellations have unit energy") {
  for (auto s : {ModulationScheme{ModFamily::psk, 2}, ModulationScheme{ModFamily::psk, 4},
                 ModulationScheme{ModFamily::psk, 8}, ModulationScheme{ModFamily::qam, 16},
                 ModulationScheme{ModFamily::qam, 64}}) {
    const auto pts = s.constellation();
    CHECK(pts.size() == static_cast<std::size_t>(s.order));
    double e = 0;
    cplx m{};
    for (auto p : pts) {
      e += std::norm(p);
      m += p;
    }
    CHECK(e / pts.size() == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m) < 1e-12);
  }
  CHECK_THROWS_AS((ModulationScheme{ModFamily::qam, 8}).constellation(), ConfigError);
  CHECK_THROWS_AS((ModulationScheme{ModFamily::psk, 3}).constellation(), ConfigError);
  CHECK(ModulationScheme::parse("16QAM") == ModulationScheme::qam16());
  CHECK(ModulationScheme::parse("QPSK").name() == "QPSK");
  CHECK_THROWS_AS(ModulationScheme::parse("QAM"), ConfigError);
}

TEST_CASE("QPSK symbols sit on the diagonals") {
  CounterRng rng(3);
  for (auto s : map_symbols(rng, ModulationScheme::qpsk(), 1000)) {
    CHECK(std::abs(std::abs(s.real()) - M_SQRT1_2) < 1e-15);
    CHECK(std::abs(std::abs(s.imag()) - M_SQRT1_2) < 1e-15);
  }
}

TEST_CASE("16-QAM empirical energy and mean") {
  CounterRng rng(4);
  const auto s = map_symbols(rng, ModulationScheme::qam16(), 100000);
  double e = 0;
  cplx m{};
  for (auto v : s) {
    e += std::norm(v);
    m += v;
  }
  CHECK(e / s.size() == Approx(1.0).epsilon(0.01));
  CHECK(std::abs(m / double(s.size())) < 0.01);
}

TEST_CASE("symbol mapping is reproducible and uses every point") {
  CounterRng a(9), b(9);
  const auto x = map_symbols(a, {ModFamily::psk, 2}, 4);
  const auto y = map_symbols(b, {ModFamily::psk, 2}, 4);
  CHECK(x == y);
  CounterRng c(10);
  std::set<std::pair<double, double>> seen;
  for (auto s : map_symbols(c, ModulationScheme::qam16(), 2000)) seen.insert({s.real(), s.imag()});
  CHECK(seen.size() == 16);
}

TEST_CASE("symbol whiteness") {
  CounterRng rng(12);
  const std::size_t n = 40000;
  const auto s = map_symbols(rng, ModulationScheme::qpsk(), n);
  cplx lag1{}, pseudo{};
  for (std::size_t i = 0; i + 1 < n; ++i) lag1 += s[i + 1] * std::conj(s[i]);
  for (auto v : s) pseudo += v * v;
  CHECK(std::abs(lag1) / n < 3.0 / std::sqrt(double(n)));
  CHECK(std::abs(pseudo) / n < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("code shapes") {
  CHECK(code_shape(CodeId::sm).tx_antennas == 2);
  CHECK(code_shape(CodeId::sm, 3).block_symbols == 3);
  CHECK(code_shape(CodeId::al).length == 2);
  CHECK(code_shape(CodeId::sfbc1).length == 8);
  CHECK(code_shape(CodeId::sfbc1).block_symbols == 4);
  CHECK(code_shape(CodeId::sfbc2).length == 4);
  CHECK(code_shape(CodeId::sfbc2).block_symbols == 3);
  CHECK(parse_code("SFBC2") == CodeId::sfbc2);
  CHECK_THROWS_AS(parse_code("STBC"), ConfigError);
}

TEST_CASE("Alamouti codeword") {
  std::vector<cplx> x{1.0, I};
  const auto c = encode(CodeId::al, x, 1.0);
  CHECK(c(0, 0) == cplx(1.0));
  CHECK(c(1, 0) == I);
  CHECK(c(0, 1) == I);
  CHECK(c(1, 1) == cplx(1.0));
  CHECK_THROWS_AS(encode(CodeId::al, std::vector<cplx>{1.0}, 1.0), EncodeError);
}

TEST_CASE("Alamouti columns are orthogonal") {
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_symbols(100 + t, 2);
    const auto c = encode(CodeId::al, x, 1.0);
    const double e = std::norm(x[0]) + std::norm(x[1]);
    const cplx g01 = c(0, 0) * std::conj(c(0, 1)) + c(1, 0) * std::conj(c(1, 1));
    const double g00 = std::norm(c(0, 0)) + std::norm(c(1, 0));
    const double g11 = std::norm(c(0, 1)) + std::norm(c(1, 1));
    CHECK(std::abs(g01) < 1e-12);
    CHECK(std::abs(g00 - e) < 1e-12);
    CHECK(std::abs(g11 - e) < 1e-12);
  }
}

TEST_CASE("SFBC1 codeword") {
  const auto x = random_symbols(7, 4);
  const auto c = encode(CodeId::sfbc1, x, 1.0);
  CHECK(c.rows() == 3);
  CHECK(c.cols() == 8);
  CHECK(c(0, 4) == std::conj(x[0]));
  CHECK(c(1, 1) == x[0]);
  CHECK(c(2, 3) == x[1]);
  CHECK(c(2, 1) == -x[3]);
  for (int a = 0; a < 3; ++a)
    for (int s = 0; s < 4; ++s) CHECK(c(a, s + 4) == std::conj(c(a, s)));
}

TEST_CASE("SFBC2 codeword") {
  std::vector<cplx> x{1.0, I, 0.0};
  const auto c = encode(CodeId::sfbc2, x, 1.0);
  CHECK(std::abs(c(2, 2) - cplx(-1.0, 1.0)) < 1e-15);
  CHECK(c(0, 0) == cplx(1.0));
  CHECK(c(1, 1) == cplx(1.0));
  CHECK(c(0, 1) == I);
}

TEST_CASE("power scaling gives unit total power per sub-carrier") {
  for (auto code : {CodeId::sm, CodeId::al, CodeId::sfbc1, CodeId::sfbc2}) {
    const auto shape = code_shape(code);
    const double s = unit_power_scale(code);
    CounterRng rng(31);
    double e = 0;
    const int blocks = 20000;
    for (int b = 0; b < blocks; ++b) {
      const auto x = map_symbols(rng, ModulationScheme::qpsk(), shape.block_symbols);
      const auto c = encode(code, x, s);
      for (int a = 0; a < c.rows(); ++a)
        for (int k = 0; k < c.cols(); ++k) e += std::norm(c(a, k));
    }
    CHECK(e / (blocks * shape.length) == Approx(1.0).epsilon(0.01));
  }
  CHECK(unit_power_scale(CodeId::sm, 3) == Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("assemble_grid layout and bijection") {
  const auto x = random_symbols(8, 2 * 2 * 3);  // N=4, N_b=3, AL
  const auto g = assemble_grid(CodeId::al, x, 4, 3, 1.0);
  CHECK(g.antennas() == 2);
  // Symbol 0: codeword 1 on sub-carriers 1-2, codeword 2 on 3-4.
  CHECK(g(0, 0, 0) == x[0]);
  CHECK(g(1, 0, 0) == x[1]);
  CHECK(g(0, 1, 0) == -std::conj(x[1]));
  CHECK(g(0, 2, 0) == x[2]);
  CHECK(g(1, 3, 0) == std::conj(x[2]));
  CHECK(g(0, 0, 1) == x[4]);
  CHECK(disassemble_grid(CodeId::al, g, 1.0) == x);

  const auto y = random_symbols(9, 2 * 4);  // SM, N=4, N_b=1
  const auto gs = assemble_grid(CodeId::sm, y, 4, 1, 1.0);
  for (int k = 0; k < 4; ++k) {
    CHECK(gs(0, k, 0) == y[2 * k]);
    CHECK(gs(1, k, 0) == y[2 * k + 1]);
  }
  for (auto code : {CodeId::sfbc1, CodeId::sfbc2, CodeId::sm}) {
    const auto shape = code_shape(code, 3);
    const auto z = random_symbols(10, 2 * (16 / shape.length) * shape.block_symbols);
    const auto gz = assemble_grid(code, z, 16, 2, 0.7, 3);
    const auto back = disassemble_grid(code, gz, 0.7, 3);
    REQUIRE(back.size() == z.size());
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(back[i] - z[i]) < 1e-12);
  }
  CHECK_THROWS_AS(assemble_grid(CodeId::sfbc1, random_symbols(1, 4), 6, 1, 1.0), ConfigError);
  CHECK_THROWS_AS(assemble_grid(CodeId::al, random_symbols(1, 3), 4, 1, 1.0), ConfigError);
}

TEST_CASE("OFDM modulation: basis, cyclic prefix, Parseval") {
  const int n = 16, cp = 4;
  ResourceGrid g(1, n, 2);
  g(0, 3, 0) = 1.0;
  const auto f = ofdm_modulate(g, cp);
  CHECK(f.length() == 2u * (n + cp));
  const auto s = f.antenna(0);
  for (int m = 0; m < n; ++m) {
    const cplx expect = std::polar(1.0 / std::sqrt(n), 2 * M_PI * 3 * m / n);
    CHECK(std::abs(s[cp + m] - expect) < 1e-12);
  }

  ResourceGrid r(2, 64, 3);
  CounterRng rng(5);
  for (auto& v : r.raw()) v = rng.complex_gaussian(1.0);
  const auto fr = ofdm_modulate(r, 8);
  double ef = 0, et = 0;
  for (auto v : r.raw()) ef += std::norm(v);
  for (int a = 0; a < 2; ++a) {
    const auto x = fr.antenna(a);
    for (int sym = 0; sym < 3; ++sym) {
      const std::size_t base = sym * 72;
      for (int m = 0; m < 8; ++m) CHECK(x[base + m] == x[base + 64 + m]);
      for (int m = 8; m < 72; ++m) et += std::norm(x[base + m]);
    }
  }
  CHECK(et == Approx(ef).epsilon(1e-12));
  CHECK_THROWS_AS(ofdm_modulate(r, -1), ConfigError);
}

TEST_CASE("unitary DFT round trip") {
  const auto x = random_symbols(77, 48);
  std::vector<cplx> y(48), z(48);
  unitary_dft(x, y);
  unitary_idft(y, z);
  for (int i = 0; i < 48; ++i) CHECK(std::abs(z[i] - x[i]) < 1e-12);
  // In-place call.
  std::vector<cplx> w = x;
  unitary_dft(w, w);
  for (int i = 0; i < 48; ++i) CHECK(std::abs(w[i] - y[i]) < 1e-12);
}
