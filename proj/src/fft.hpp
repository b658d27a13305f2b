// Internal FFTW wrapper. Plan creation and destruction are serialized; execution is thread-safe.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

struct fftw_plan_s;

namespace streamgov::detail {

/// Version string reported by the linked FFTW.
const char* fft_library_version() noexcept;

/// Real-to-complex forward transform of a fixed length, unnormalized, bins 0..n/2.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  [[nodiscard]] std::size_t size() const noexcept { return n_; }

  /// Transforms `input` (length n) into `output` (resized to n/2 + 1).
  void forward(std::span<const double> input, std::vector<std::complex<double>>& output);

 private:
  std::size_t n_;
  double* in_{nullptr};
  void* out_{nullptr};
  fftw_plan_s* plan_{nullptr};
};

}  // namespace streamgov::detail
