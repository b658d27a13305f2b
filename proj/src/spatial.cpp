#include "streamgov/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "streamgov/parallel.hpp"
#include "streamgov/random.hpp"

namespace streamgov::spatial {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double squared(const GeoPoint& a, const GeoPoint& b) {
  const double dy = a.latitude - b.latitude;
  const double dx = a.longitude - b.longitude;
  return dx * dx + dy * dy;
}

std::vector<GeoPoint> seed_plus_plus(std::span<const GeoPoint> points, std::size_t k, CounterRng& rng) {
  const std::size_t n = points.size();
  std::vector<GeoPoint> centroids;
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  std::size_t pick = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double d : nearest) total += d;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (nearest[i] <= 0.0) continue;
          acc += nearest[i];
          pick = i;
          if (acc > target) break;
        }
      } else {
        // Every point coincides with a centroid: take a uniformly random unchosen index.
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) free.push_back(i);
        }
        pick = free[static_cast<std::size_t>(rng.below(free.size()))];
      }
    }
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared(points[i], points[pick]));
  }
  return centroids;
}

}  // namespace

double geodesic_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.latitude * kDegToRad, phi2 = b.latitude * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.longitude - a.longitude) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

Matrix geodesic_distance_matrix(std::span<const GeoPoint> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = geodesic_distance(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    }
  }
  return d;
}

std::vector<GeoPoint> station_points(const Collection& collection) {
  std::vector<GeoPoint> out;
  out.reserve(collection.size());
  for (const auto& s : collection.stations()) out.push_back(GeoPoint{s.meta.latitude, s.meta.longitude});
  return out;
}

KMeansResult kmeans(std::span<const GeoPoint> points, std::size_t k, std::uint64_t seed, std::size_t max_iters) {
  const std::size_t n = points.size();
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= k <= number of points");

  CounterRng rng(seed);
  KMeansResult out;
  out.k = k;
  out.centroids = seed_plus_plus(points, k, rng);
  out.labels.assign(n, 0);
  std::vector<std::size_t> previous(n, std::numeric_limits<std::size_t>::max());

  for (std::size_t iter = 0; iter < std::max<std::size_t>(1, max_iters); ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared(points[i], out.centroids[c]);
        if (d < best) {
          best = d;
          out.labels[i] = c;
        }
      }
    }

    std::vector<std::size_t> counts(k, 0);
    for (auto l : out.labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[out.labels[i]] < 2) continue;
        const double d = squared(points[i], out.centroids[out.labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[out.labels[far]];
      out.labels[far] = c;
      counts[c] = 1;
    }

    if (out.labels == previous) break;
    previous = out.labels;

    std::vector<double> sum_lat(k, 0.0), sum_lon(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sum_lat[out.labels[i]] += points[i].latitude;
      sum_lon[out.labels[i]] += points[i].longitude;
    }
    for (std::size_t c = 0; c < k; ++c) {
      const auto m = static_cast<double>(counts[c]);
      out.centroids[c] = GeoPoint{sum_lat[c] / m, sum_lon[c] / m};
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += squared(points[i], out.centroids[out.labels[i]]);
    out.inertia_history.push_back(inertia);
    out.iterations = iter + 1;
  }
  out.inertia = out.inertia_history.back();
  return out;
}

ElbowResult elbow_select(std::span<const GeoPoint> points, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                         std::size_t restarts) {
  if (k_min < 1 || k_max < k_min + 2) throw std::invalid_argument("elbow_select: k range needs at least 3 values");
  if (k_max > points.size()) throw std::invalid_argument("elbow_select: k_max exceeds number of points");
  if (restarts < 1) throw std::invalid_argument("elbow_select: restarts must be at least 1");

  const std::size_t count = k_max - k_min + 1;
  std::vector<KMeansResult> runs(count * restarts);
  parallel_for(runs.size(), [&](std::size_t r) {
    const std::size_t k = k_min + r / restarts;
    runs[r] = kmeans(points, k, derive_seed(seed, k, r % restarts));
  });

  ElbowResult out;
  for (std::size_t j = 0; j < count; ++j) {
    std::size_t best = j * restarts;
    for (std::size_t r = 1; r < restarts; ++r) {
      if (runs[j * restarts + r].inertia < runs[best].inertia) best = j * restarts + r;
    }
    out.ks.push_back(k_min + j);
    out.inertia.push_back(runs[best].inertia);
    out.fits.push_back(std::move(runs[best]));
  }

  double best_curvature = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j + 1 < count; ++j) {
    const double curvature = out.inertia[j - 1] - 2.0 * out.inertia[j] + out.inertia[j + 1];
    if (curvature > best_curvature) {
      best_curvature = curvature;
      out.selected_k = out.ks[j];
    }
  }
  return out;
}

Matrix cluster_distances(const Matrix& geodesic, std::span<const std::size_t> labels, std::size_t k) {
  if (geodesic.rows() != geodesic.cols() || static_cast<std::size_t>(geodesic.rows()) != labels.size()) {
    throw std::invalid_argument("cluster_distances: one label per matrix row required");
  }
  for (auto l : labels) {
    if (l >= k) throw std::invalid_argument("cluster_distances: label out of range");
  }
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Matrix pairs = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      const auto a = static_cast<Eigen::Index>(std::min(labels[i], labels[j]));
      const auto b = static_cast<Eigen::Index>(std::max(labels[i], labels[j]));
      sum(a, b) += geodesic(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      pairs(a, b) += 1.0;
    }
  }
  Matrix out = Matrix::Zero(sum.rows(), sum.cols());
  for (Eigen::Index a = 0; a < out.rows(); ++a) {
    for (Eigen::Index b = a; b < out.cols(); ++b) {
      out(a, b) = out(b, a) = pairs(a, b) > 0.0 ? sum(a, b) / pairs(a, b) : 0.0;
    }
  }
  return out;
}

}  // namespace streamgov::spatial
