#include "hctone/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "hctone/error.h"

namespace hctone {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// The FFTW planner is not thread-safe; fftw_execute_dft_* on an existing plan
// is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  const int size = static_cast<int>(n);
  PlanPair p{fftw_plan_dft_r2c_1d(size, in, out, FFTW_ESTIMATE),
             fftw_plan_dft_c2r_1d(size, out, in, FFTW_ESTIMATE)};
  fftw_free(in);
  fftw_free(out);
  cache.emplace(n, p);
  return p;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size < 2) throw Error(ErrorCode::kInvalidParameter, "FFT size must be >= 2");
  const PlanPair p = plans_for(size);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> input) const {
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(size_));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(bins()));
  const std::size_t n = std::min(input.size(), size_);
  std::copy_n(input.begin(), n, in.get());
  std::fill(in.get() + n, in.get() + size_, 0.0);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in.get(), out.get());
  std::vector<std::complex<double>> result(bins());
  for (std::size_t k = 0; k < bins(); ++k)
    result[k] = {out.get()[k][0], out.get()[k][1]};
  return result;
}

std::vector<double> RealFft::inverse(std::span<const std::complex<double>> spectrum) const {
  if (spectrum.size() != bins())
    throw Error(ErrorCode::kInvalidInput, "spectrum size does not match FFT size");
  std::unique_ptr<fftw_complex, FftwDeleter> in(fftw_alloc_complex(bins()));
  std::unique_ptr<double, FftwDeleter> out(fftw_alloc_real(size_));
  for (std::size_t k = 0; k < bins(); ++k) {
    in.get()[k][0] = spectrum[k].real();
    in.get()[k][1] = spectrum[k].imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), in.get(), out.get());
  return std::vector<double>(out.get(), out.get() + size_);
}

}  // namespace hctone
