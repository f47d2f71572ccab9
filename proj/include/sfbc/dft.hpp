#pragma once

#include <complex>
#include <span>

namespace sfbc {

// Unitary DFT helpers (1/sqrt(N) in both directions). Backed by FFTW plans
// cached per size; safe to call from multiple threads.
void unitary_dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void unitary_idft(std::span<const std::complex<double>> in,
                  std::span<std::complex<double>> out);

}  // namespace sfbc
