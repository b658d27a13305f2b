/**
 * @file spectral.hpp
 * @brief Periodogram and Welch spectral estimates, Whittle deviance and the collection-wide
 *        search for Welch parameters.
 *
 * Frequencies are in cycles per sample (cycles/day for daily data). The DFT uses the
 * unitary 1/sqrt(n) scaling, so a periodogram of white noise sits at the noise variance.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "streamgov/temporal.hpp"
#include "streamgov/types.hpp"

namespace streamgov::spectral {

/// One-sided spectrum on the grid j/n, j = 0..floor(n/2).
struct PowerSpectrum {
  std::vector<double> frequencies;
  std::vector<double> values;
};

struct WelchParams {
  std::size_t segment_length{0};  ///< S, samples per segment
  double overlap{0.0};            ///< fraction of a segment shared with the next, [0, 0.95]

  /// round(S * (1 - overlap))
  [[nodiscard]] std::size_t step() const noexcept;
  friend bool operator==(const WelchParams&, const WelchParams&) = default;
};

enum class Taper { Hann, Rectangular };

/// Z(j/n) = n^{-1/2} sum_{t=1..n} x(t) exp(-2 pi i j t / n), j = 0..n-1.
std::vector<std::complex<double>> dft(std::span<const double> x);

/// |Z(j/n)|^2 on the half grid.
PowerSpectrum periodogram(std::span<const double> x);

/// floor((length - S) / step) + 1; throws std::invalid_argument for S > length or step < 1.
std::size_t welch_segment_count(std::size_t length, const WelchParams& params);

/**
 * @brief Welch estimate on the S-point half grid.
 *
 * Segments start at multiples of params.step(); samples after the last full segment are
 * dropped. Each segment is mean-removed and tapered; its periodogram is divided by the
 * taper's mean square so white noise of variance s^2 gives a flat spectrum at s^2.
 */
PowerSpectrum welch_psd(std::span<const double> x, const WelchParams& params, Taper taper = Taper::Hann);

/// sum_j [log f_j + I_j / f_j]. Lower is better. Throws std::invalid_argument on a size
/// mismatch or any f_j <= 0.
double whittle_deviance(std::span<const double> model, std::span<const double> periodogram);

/**
 * @brief Evaluates a Welch estimate on another frequency grid.
 *
 * Linear interpolation of log power against frequency through the non-zero Welch bins,
 * held constant beyond the first and last of them. Power is floored at 1e-12 * max first.
 */
/// `frequencies` must be ascending.
std::vector<double> interpolate_spectrum(const PowerSpectrum& welch, std::span<const double> frequencies);

/// Whittle deviance of one detrended series against its own periodogram, zero frequency excluded.
double welch_deviance(std::span<const double> detrended, const PowerSpectrum& periodogram, const WelchParams& params);

struct WelchGrid {
  std::vector<std::size_t> segment_lengths;
  std::vector<double> overlaps;

  /// S in {250, 750, 1250, 1875, 2500, 3750, 4750, 7123}, overlap in {0, .2, .4, .5, .6, .75}.
  static WelchGrid defaults();
  /// Candidates ordered by (S, overlap), the tie-break order of the search.
  [[nodiscard]] std::vector<WelchParams> candidates() const;
};

struct WelchOptimization {
  std::vector<WelchParams> grid;   ///< evaluation order
  std::vector<double> deviance;    ///< collection total per grid entry
  WelchParams selected{};
  std::size_t selected_index{0};
};

/// Exhaustive search minimizing the summed Whittle deviance over all stations.
/// Throws std::invalid_argument for an empty grid or any S larger than the series.
WelchOptimization optimize_welch_params(const Collection& collection, const WelchGrid& grid);

struct SpectralAnalysis {
  std::vector<PowerSpectrum> spectra;  ///< Welch estimate per station
  temporal::AffinityMatrix affinity;   ///< domain = Spectral
};

/// Welch spectra of the detrended stations, L1-normalized and compared like trajectories.
SpectralAnalysis spectral_affinity(const Collection& collection, const WelchParams& params);

}  // namespace streamgov::spectral
