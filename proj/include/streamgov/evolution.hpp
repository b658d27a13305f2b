/**
 * @file evolution.hpp
 * @brief Time-varying PCA of the collection: rolling correlation matrices, their leading
 *        eigenpair, and the rolling spectrum of the governing process.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "streamgov/spectral.hpp"
#include "streamgov/types.hpp"

namespace streamgov::evolution {

/**
 * @brief Pearson correlation of all stations over days (t - w, t], t being 1-based.
 *
 * A station that is constant over the window has undefined correlation; it is given
 * correlation 0 with every other station and 1 with itself, and its index is appended to
 * `degenerate` when provided. Throws std::invalid_argument unless 2 <= w <= t <= T.
 */
Matrix rolling_correlation(const Collection& collection, std::size_t t, std::size_t w,
                           std::vector<std::size_t>* degenerate = nullptr);

struct EigenDecomposition {
  Eigen::VectorXd values;  ///< descending
  Matrix vectors;          ///< column k pairs with values[k]; unit norm, largest-|entry| positive
};

/// Throws std::invalid_argument for a non-square or non-symmetric matrix.
EigenDecomposition eigen_decompose(const Matrix& symmetric);

struct RollingEigenSeries {
  std::vector<std::size_t> times;                ///< 1-based window end days
  std::vector<double> lambda1_norm;              ///< lambda_1 / sum of eigenvalues
  std::vector<double> eigenvalue_sum;            ///< trace check, n for correlation input
  std::vector<std::vector<double>> eigvec1_abs;  ///< |v_1| per time, one entry per station
  double coeff_variance{0.0};                    ///< population variance of all stored |v_1| entries
  std::size_t degenerate_windows{0};             ///< windows where some station was constant
};

/// Evaluates at t = w, w + stride, ... <= T. Windows are processed in parallel.
RollingEigenSeries rolling_eigen_series(const Collection& collection, std::size_t w, std::size_t stride);

/// Station i becomes x_i(t + phi_i) over the common range t = 1..T - max(phi).
Collection aligned_view(const Collection& collection, std::span<const std::size_t> offsets);

struct Spectrogram {
  std::size_t window_length{0};
  std::vector<std::size_t> window_starts;  ///< 0-based first day of each window
  std::vector<spectral::PowerSpectrum> spectra;
};

/// Detrended Welch estimate of each window; windows advance by `stride`.
Spectrogram rolling_psd(std::span<const double> series, std::size_t window_length, std::size_t stride,
                        const spectral::WelchParams& params);

}  // namespace streamgov::evolution
