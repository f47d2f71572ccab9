#include "sfbc/dft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "sfbc/errors.hpp"

namespace sfbc {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void transform(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
               int sign) {
  if (in.size() != out.size() || in.empty()) throw DomainError("dft: size mismatch");
  const int n = static_cast<int>(in.size());
  fftw_plan plan = cache().get(n, sign);
  // FFTW does not write through `in` for out-of-place complex transforms.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  if (in.data() == out.data()) {
    std::vector<std::complex<double>> tmp(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(tmp.data()), dst);
  } else {
    fftw_execute_dft(plan, src, dst);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= scale;
}

}  // namespace

void unitary_dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  transform(in, out, FFTW_FORWARD);
}

void unitary_idft(std::span<const std::complex<double>> in,
                  std::span<std::complex<double>> out) {
  transform(in, out, FFTW_BACKWARD);
}

}  // namespace sfbc
