#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <stdexcept>

namespace streamgov::detail {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

const char* fft_library_version() noexcept { return fftw_version; }

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft: zero length");
  std::lock_guard lock(planner_mutex());
  in_ = fftw_alloc_real(n);
  out_ = fftw_alloc_complex(n / 2 + 1);
  if (!in_ || !out_) {
    fftw_free(in_);
    fftw_free(out_);
    throw std::bad_alloc();
  }
  plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, static_cast<fftw_complex*>(out_), FFTW_ESTIMATE);
  if (!plan_) {
    fftw_free(in_);
    fftw_free(out_);
    throw std::runtime_error("RealFft: planning failed");
  }
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan_);
  fftw_free(in_);
  fftw_free(out_);
}

void RealFft::forward(std::span<const double> input, std::vector<std::complex<double>>& output) {
  if (input.size() != n_) throw std::invalid_argument("RealFft: input length mismatch");
  std::copy(input.begin(), input.end(), in_);
  fftw_execute(plan_);
  const auto* out = static_cast<const fftw_complex*>(out_);
  output.resize(n_ / 2 + 1);
  for (std::size_t j = 0; j < output.size(); ++j) output[j] = {out[j][0], out[j][1]};
}

}  // namespace streamgov::detail
