/**
 * @file temporal.hpp
 * @brief Amplitude-normalized trajectory comparison, affinity matrices and agglomerative clustering.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "streamgov/types.hpp"

namespace streamgov::temporal {

/// Non-negative series rescaled to sum to 1, one per station, in collection order.
struct TrajectoryCollection {
  std::vector<std::vector<double>> trajectories;
};

enum class Domain { Temporal, Spectral };
std::string_view to_string(Domain domain);

/**
 * @brief Similarity in [0, 1] derived as 1 - D / max(D).
 *
 * `norm` is the mean of the strictly upper-triangular entries: 1 when every pair is
 * identical, 0 when every pair is maximally distant.
 */
struct AffinityMatrix {
  Matrix values;
  double norm{0.0};
  Domain domain{Domain::Temporal};
};

enum class Linkage { Average, Single, Complete };
std::string_view to_string(Linkage linkage);

/// One agglomeration. Leaves are clusters 0..n-1; the cluster formed at step s gets id n + s.
struct Merge {
  std::size_t cluster_a{};  ///< smaller id
  std::size_t cluster_b{};  ///< larger id
  double height{};
  std::size_t size{};
};

struct Dendrogram {
  std::size_t leaves{};
  std::vector<Merge> merges;             ///< exactly leaves - 1 entries, heights non-decreasing
  std::vector<std::size_t> leaf_order;   ///< left-to-right leaf order of the tree
};

/// Divides by the total. Throws DataError when the total is not strictly positive.
std::vector<double> normalize_l1(std::span<const double> x);

/// Throws DataError naming the station when one has zero total flow.
TrajectoryCollection normalize_l1(const Collection& collection);

/// Pairwise sum of absolute differences. Rows are computed in parallel.
Matrix l1_distance_matrix(std::span<const std::vector<double>> vectors);

inline Matrix temporal_distance(const TrajectoryCollection& t) { return l1_distance_matrix(t.trajectories); }

/// Requires a non-negative symmetric matrix with zero diagonal and n >= 2 (std::invalid_argument);
/// throws DataError when every distance is zero.
AffinityMatrix to_affinity(const Matrix& distance, Domain domain);

/**
 * @brief Agglomerative clustering on the dissimilarity 1 - A.
 *
 * Lance-Williams updates; among equal minima the pair whose lowest member indices are
 * smallest (lexicographically) merges first, so output is deterministic.
 */
Dendrogram hierarchical_cluster(const AffinityMatrix& affinity, Linkage linkage = Linkage::Average);

/// Same, on an explicit symmetric dissimilarity matrix.
Dendrogram cluster_dissimilarity(const Matrix& dissimilarity, Linkage linkage = Linkage::Average);

/**
 * @brief Flat partition into k clusters by undoing the k-1 highest merges.
 *
 * Labels are numbered in order of first appearance along station index. Throws
 * std::invalid_argument unless 1 <= k <= leaves.
 */
std::vector<std::size_t> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k);

}  // namespace streamgov::temporal
