#include "streamgov/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "streamgov/ingest.hpp"
#include "streamgov/parallel.hpp"

namespace streamgov::evolution {

Matrix rolling_correlation(const Collection& collection, std::size_t t, std::size_t w,
                           std::vector<std::size_t>* degenerate) {
  if (w < 2 || t < w || t > collection.days()) {
    throw std::invalid_argument("rolling_correlation: need 2 <= w <= t <= T (w=" + std::to_string(w) +
                                ", t=" + std::to_string(t) + ")");
  }
  const auto n = static_cast<Eigen::Index>(collection.size());
  const auto rows = static_cast<Eigen::Index>(w);
  const std::size_t begin = t - w;

  Matrix centered(rows, n);
  Eigen::VectorXd norms(n);
  std::vector<bool> constant(collection.size(), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = collection.flow(static_cast<std::size_t>(i)).subspan(begin, w);
    double mean = 0.0, raw = 0.0;
    for (double v : x) {
      mean += v;
      raw += v * v;
    }
    mean /= static_cast<double>(w);
    double ss = 0.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
      const double c = x[static_cast<std::size_t>(k)] - mean;
      centered(k, i) = c;
      ss += c * c;
    }
    // Exactly constant windows leave only rounding residue after centering.
    if (ss <= 1e-20 * std::max(1.0, raw)) {
      constant[static_cast<std::size_t>(i)] = true;
      norms(i) = 1.0;
      if (degenerate) degenerate->push_back(static_cast<std::size_t>(i));
    } else {
      norms(i) = std::sqrt(ss);
    }
  }

  Matrix corr = centered.transpose() * centered;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = 0.0;
      if (i == j) {
        v = 1.0;
      } else if (!constant[static_cast<std::size_t>(i)] && !constant[static_cast<std::size_t>(j)]) {
        v = std::clamp(corr(i, j) / (norms(i) * norms(j)), -1.0, 1.0);
      }
      corr(i, j) = v;
    }
  }
  // The product is symmetric up to rounding; mirror the upper triangle so it is exact.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) corr(j, i) = corr(i, j);
  }
  return corr;
}

EigenDecomposition eigen_decompose(const Matrix& symmetric) {
  if (symmetric.rows() != symmetric.cols()) throw std::invalid_argument("eigen_decompose: matrix is not square");
  const double scale = std::max(1.0, symmetric.cwiseAbs().maxCoeff());
  if ((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("eigen_decompose: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigen_decompose: solver did not converge");

  const Eigen::Index n = symmetric.rows();
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;  // solver returns ascending order
    out.values(k) = solver.eigenvalues()(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    v.normalize();
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0.0) v = -v;
    out.vectors.col(k) = v;
  }
  return out;
}

RollingEigenSeries rolling_eigen_series(const Collection& collection, std::size_t w, std::size_t stride) {
  if (stride < 1) throw std::invalid_argument("rolling_eigen_series: stride must be at least 1");
  if (w < 2 || w > collection.days()) throw std::invalid_argument("rolling_eigen_series: need 2 <= w <= T");

  RollingEigenSeries out;
  for (std::size_t t = w; t <= collection.days(); t += stride) out.times.push_back(t);
  const std::size_t windows = out.times.size();
  const std::size_t n = collection.size();
  out.lambda1_norm.resize(windows);
  out.eigenvalue_sum.resize(windows);
  out.eigvec1_abs.resize(windows);
  std::vector<char> degenerate(windows, 0);

  parallel_for(windows, [&](std::size_t k) {
    std::vector<std::size_t> constant;
    const auto corr = rolling_correlation(collection, out.times[k], w, &constant);
    const auto eig = eigen_decompose(corr);
    const double total = eig.values.sum();
    out.eigenvalue_sum[k] = total;
    out.lambda1_norm[k] = eig.values(0) / total;
    auto& coeffs = out.eigvec1_abs[k];
    coeffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) coeffs[i] = std::abs(eig.vectors(static_cast<Eigen::Index>(i), 0));
    degenerate[k] = constant.empty() ? 0 : 1;
  });

  double sum = 0.0, count = 0.0;
  for (const auto& c : out.eigvec1_abs) {
    for (double v : c) sum += v;
    count += static_cast<double>(c.size());
  }
  const double mean = sum / count;
  double ss = 0.0;
  for (const auto& c : out.eigvec1_abs) {
    for (double v : c) ss += (v - mean) * (v - mean);
  }
  out.coeff_variance = ss / count;
  out.degenerate_windows = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  return out;
}

Collection aligned_view(const Collection& collection, std::span<const std::size_t> offsets) {
  if (offsets.size() != collection.size()) throw std::invalid_argument("aligned_view: one offset per station");
  const std::size_t shift = offsets.empty() ? 0 : *std::max_element(offsets.begin(), offsets.end());
  if (shift >= collection.days()) throw std::invalid_argument("aligned_view: offsets leave no common range");
  const std::size_t days = collection.days() - shift;

  std::vector<StationSeries> stations;
  stations.reserve(collection.size());
  for (std::size_t i = 0; i < collection.size(); ++i) {
    const auto x = collection.flow(i).subspan(offsets[i], days);
    stations.push_back(StationSeries{collection[i].meta, std::vector<double>(x.begin(), x.end())});
  }
  return Collection(std::move(stations), collection.start_date());
}

Spectrogram rolling_psd(std::span<const double> series, std::size_t window_length, std::size_t stride,
                        const spectral::WelchParams& params) {
  if (stride < 1) throw std::invalid_argument("rolling_psd: stride must be at least 1");
  if (window_length > series.size()) throw std::invalid_argument("rolling_psd: window longer than series");
  spectral::welch_segment_count(window_length, params);

  Spectrogram out;
  out.window_length = window_length;
  for (std::size_t s = 0; s + window_length <= series.size(); s += stride) out.window_starts.push_back(s);
  out.spectra.resize(out.window_starts.size());
  parallel_for(out.window_starts.size(), [&](std::size_t k) {
    const auto detrended = ingest::detrend(series.subspan(out.window_starts[k], window_length));
    out.spectra[k] = spectral::welch_psd(detrended, params, spectral::Taper::Hann);
  });
  return out;
}

}  // namespace streamgov::evolution
