/**
 * @file spatial.hpp
 * @brief Great-circle distances between stations and K-means on their coordinates.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "streamgov/types.hpp"

namespace streamgov::spatial {

/// Mean Earth radius (IUGG), km.
inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
  double latitude{};   ///< degrees
  double longitude{};  ///< degrees
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Haversine distance in km.
double geodesic_distance(const GeoPoint& a, const GeoPoint& b);

Matrix geodesic_distance_matrix(std::span<const GeoPoint> points);

std::vector<GeoPoint> station_points(const Collection& collection);

struct KMeansResult {
  std::size_t k{0};
  std::vector<GeoPoint> centroids;
  std::vector<std::size_t> labels;
  double inertia{0.0};                  ///< sum of squared (lat, lon) distances to centroids
  std::vector<double> inertia_history;  ///< after each centroid update
  std::size_t iterations{0};
};

/**
 * @brief Lloyd's algorithm on (latitude, longitude) treated as planar coordinates.
 *
 * k-means++ seeding from `seed`; ties in assignment go to the lowest centroid index; an empty
 * cluster takes the point farthest from its centroid. Throws std::invalid_argument unless
 * 1 <= k <= points.size().
 */
KMeansResult kmeans(std::span<const GeoPoint> points, std::size_t k, std::uint64_t seed, std::size_t max_iters = 300);

struct ElbowResult {
  std::size_t selected_k{0};
  std::vector<std::size_t> ks;
  std::vector<double> inertia;       ///< best-of-restarts inertia per k
  std::vector<KMeansResult> fits;    ///< the fit behind each inertia value
};

/**
 * @brief Runs kmeans for k in [k_min, k_max] with `restarts` seeds each, keeping the lowest
 *        inertia (earliest restart on ties), and picks the interior k with the largest
 *        second difference inertia(k-1) - 2 inertia(k) + inertia(k+1).
 *
 * Restart seeds derive from (seed, k, restart) so results do not depend on thread count.
 * Throws std::invalid_argument if the range has fewer than 3 values, k_min < 1 or k_max > n.
 */
ElbowResult elbow_select(std::span<const GeoPoint> points, std::size_t k_min, std::size_t k_max,
                         std::uint64_t seed, std::size_t restarts = 10);

/// Mean geodesic distance (km) between members of each pair of clusters; diagonal is within-cluster.
Matrix cluster_distances(const Matrix& geodesic, std::span<const std::size_t> labels, std::size_t k);

}  // namespace streamgov::spatial
