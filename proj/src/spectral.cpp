#include "streamgov/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "streamgov/error.hpp"
#include "streamgov/ingest.hpp"
#include "streamgov/parallel.hpp"

namespace streamgov::spectral {
namespace {

constexpr double kPowerFloor = 1e-12;

std::vector<double> half_grid(std::size_t n) {
  std::vector<double> f(n / 2 + 1);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = static_cast<double>(j) / static_cast<double>(n);
  return f;
}

std::vector<double> make_taper(std::size_t s, Taper taper) {
  std::vector<double> w(s, 1.0);
  if (taper == Taper::Hann) {
    // Periodic Hann: exact mean square 3/8 for s >= 3.
    for (std::size_t k = 0; k < s; ++k) {
      w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(s)));
    }
  }
  return w;
}

void validate(const WelchParams& p) {
  if (p.segment_length < 2) throw std::invalid_argument("Welch segment length must be at least 2");
  if (!(p.overlap >= 0.0 && p.overlap <= 0.95)) throw std::invalid_argument("Welch overlap must lie in [0, 0.95]");
  if (p.step() < 1) throw std::invalid_argument("Welch step rounds to zero");
}

}  // namespace

std::size_t WelchParams::step() const noexcept {
  return static_cast<std::size_t>(std::llround(static_cast<double>(segment_length) * (1.0 - overlap)));
}

std::vector<std::complex<double>> dft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  detail::RealFft fft(n);
  std::vector<std::complex<double>> half;
  fft.forward(x, half);

  // FFTW sums over t = 0..n-1; the t = 1..n convention adds the phase exp(-2 pi i j / n).
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::complex<double>> z(n);
  for (std::size_t j = 0; j < half.size(); ++j) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    z[j] = half[j] * std::polar(scale, angle);
  }
  for (std::size_t j = half.size(); j < n; ++j) z[j] = std::conj(z[n - j]);
  return z;
}

PowerSpectrum periodogram(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("periodogram needs at least 2 samples");
  detail::RealFft fft(n);
  std::vector<std::complex<double>> half;
  fft.forward(x, half);
  PowerSpectrum out;
  out.frequencies = half_grid(n);
  out.values.resize(half.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < half.size(); ++j) out.values[j] = std::norm(half[j]) * inv_n;
  return out;
}

std::size_t welch_segment_count(std::size_t length, const WelchParams& params) {
  validate(params);
  if (params.segment_length > length) {
    throw std::invalid_argument("Welch segment length " + std::to_string(params.segment_length) +
                                " exceeds series length " + std::to_string(length));
  }
  return (length - params.segment_length) / params.step() + 1;
}

PowerSpectrum welch_psd(std::span<const double> x, const WelchParams& params, Taper taper) {
  const std::size_t segments = welch_segment_count(x.size(), params);
  const std::size_t s = params.segment_length;
  const std::size_t step = params.step();

  const auto w = make_taper(s, taper);
  const double mean_square = std::inner_product(w.begin(), w.end(), w.begin(), 0.0) / static_cast<double>(s);
  const double scale = 1.0 / (static_cast<double>(s) * mean_square);

  detail::RealFft fft(s);
  std::vector<double> buffer(s);
  std::vector<std::complex<double>> spectrum;
  PowerSpectrum out;
  out.frequencies = half_grid(s);
  out.values.assign(out.frequencies.size(), 0.0);

  for (std::size_t k = 0; k < segments; ++k) {
    const auto seg = x.subspan(k * step, s);
    const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(s);
    for (std::size_t t = 0; t < s; ++t) buffer[t] = (seg[t] - mean) * w[t];
    fft.forward(buffer, spectrum);
    for (std::size_t j = 0; j < spectrum.size(); ++j) out.values[j] += std::norm(spectrum[j]) * scale;
  }
  const double inv = 1.0 / static_cast<double>(segments);
  for (double& v : out.values) v *= inv;
  return out;
}

double whittle_deviance(std::span<const double> model, std::span<const double> periodogram) {
  if (model.size() != periodogram.size()) throw std::invalid_argument("whittle_deviance: grid size mismatch");
  double sum = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const double f = model[j];
    if (!(f > 0.0)) throw std::invalid_argument("whittle_deviance: model spectrum must be positive");
    sum += std::log(f) + periodogram[j] / f;
  }
  return sum;
}

std::vector<double> interpolate_spectrum(const PowerSpectrum& welch, std::span<const double> frequencies) {
  if (welch.values.size() < 2) throw std::invalid_argument("interpolate_spectrum: need a non-zero frequency bin");
  const double peak = *std::max_element(welch.values.begin(), welch.values.end());
  const double floor = peak > 0.0 ? kPowerFloor * peak : kPowerFloor;

  // Knots skip the zero-frequency bin.
  const std::size_t first = 1;
  const std::size_t last = welch.values.size() - 1;
  std::vector<double> log_power(welch.values.size());
  for (std::size_t j = first; j <= last; ++j) log_power[j] = std::log(std::max(welch.values[j], floor));

  std::vector<double> out(frequencies.size());
  std::size_t k = first;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const double nu = frequencies[i];
    double lp = 0.0;
    if (nu <= welch.frequencies[first]) {
      lp = log_power[first];
    } else if (nu >= welch.frequencies[last]) {
      lp = log_power[last];
    } else {
      while (welch.frequencies[k + 1] < nu) ++k;
      const double x0 = welch.frequencies[k], x1 = welch.frequencies[k + 1];
      const double frac = (nu - x0) / (x1 - x0);
      lp = log_power[k] + frac * (log_power[k + 1] - log_power[k]);
    }
    out[i] = std::exp(lp);
  }
  return out;
}

double welch_deviance(std::span<const double> detrended, const PowerSpectrum& periodogram,
                      const WelchParams& params) {
  const auto welch = welch_psd(detrended, params, Taper::Hann);
  const std::span<const double> freqs(periodogram.frequencies.data() + 1, periodogram.frequencies.size() - 1);
  const std::span<const double> power(periodogram.values.data() + 1, periodogram.values.size() - 1);
  const auto model = interpolate_spectrum(welch, freqs);
  return whittle_deviance(model, power);
}

WelchGrid WelchGrid::defaults() {
  return WelchGrid{{250, 750, 1250, 1875, 2500, 3750, 4750, 7123}, {0.0, 0.2, 0.4, 0.5, 0.6, 0.75}};
}

std::vector<WelchParams> WelchGrid::candidates() const {
  auto lengths = segment_lengths;
  auto overlaps_sorted = overlaps;
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
  std::sort(overlaps_sorted.begin(), overlaps_sorted.end());
  overlaps_sorted.erase(std::unique(overlaps_sorted.begin(), overlaps_sorted.end()), overlaps_sorted.end());
  std::vector<WelchParams> out;
  for (auto s : lengths) {
    for (double o : overlaps_sorted) out.push_back(WelchParams{s, o});
  }
  return out;
}

WelchOptimization optimize_welch_params(const Collection& collection, const WelchGrid& grid) {
  WelchOptimization out;
  out.grid = grid.candidates();
  if (out.grid.empty()) throw std::invalid_argument("optimize_welch_params: empty grid");
  for (const auto& p : out.grid) welch_segment_count(collection.days(), p);

  const std::size_t n = collection.size();
  std::vector<std::vector<double>> detrended(n);
  std::vector<PowerSpectrum> periodograms(n);
  parallel_for(n, [&](std::size_t i) {
    detrended[i] = ingest::detrend(collection.flow(i));
    periodograms[i] = periodogram(detrended[i]);
  });

  const std::size_t cells = out.grid.size() * n;
  std::vector<double> per_station(cells);
  parallel_for(cells, [&](std::size_t c) {
    const std::size_t g = c / n, i = c % n;
    per_station[c] = welch_deviance(detrended[i], periodograms[i], out.grid[g]);
  });

  out.deviance.assign(out.grid.size(), 0.0);
  for (std::size_t g = 0; g < out.grid.size(); ++g) {
    for (std::size_t i = 0; i < n; ++i) out.deviance[g] += per_station[g * n + i];
  }
  // Strict comparison keeps the earliest candidate, i.e. smaller S then smaller overlap.
  for (std::size_t g = 1; g < out.grid.size(); ++g) {
    if (out.deviance[g] < out.deviance[out.selected_index]) out.selected_index = g;
  }
  out.selected = out.grid[out.selected_index];
  return out;
}

SpectralAnalysis spectral_affinity(const Collection& collection, const WelchParams& params) {
  const std::size_t n = collection.size();
  welch_segment_count(collection.days(), params);
  SpectralAnalysis out;
  out.spectra.resize(n);
  std::vector<std::vector<double>> normalized(n);
  parallel_for(n, [&](std::size_t i) {
    out.spectra[i] = welch_psd(ingest::detrend(collection.flow(i)), params, Taper::Hann);
  });
  for (std::size_t i = 0; i < n; ++i) {
    try {
      normalized[i] = temporal::normalize_l1(out.spectra[i].values);
    } catch (const DataError&) {
      throw DataError("station '" + collection[i].meta.station_id + "' has an all-zero spectrum");
    }
  }
  out.affinity = temporal::to_affinity(temporal::l1_distance_matrix(normalized), temporal::Domain::Spectral);
  return out;
}

}  // namespace streamgov::spectral
