#include "streamgov/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "streamgov/error.hpp"
#include "streamgov/parallel.hpp"

namespace streamgov::temporal {

std::string_view to_string(Domain domain) { return domain == Domain::Temporal ? "temporal" : "spectral"; }

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::Average:
      return "average";
    case Linkage::Single:
      return "single";
    case Linkage::Complete:
      return "complete";
  }
  return "average";
}

std::vector<double> normalize_l1(std::span<const double> x) {
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw DataError("series has zero total; cannot L1-normalize");
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [total](double v) { return v / total; });
  return out;
}

TrajectoryCollection normalize_l1(const Collection& collection) {
  TrajectoryCollection out;
  out.trajectories.reserve(collection.size());
  for (const auto& s : collection.stations()) {
    try {
      out.trajectories.push_back(normalize_l1(s.flow));
    } catch (const DataError&) {
      throw DataError("station '" + s.meta.station_id + "' has zero total flow; cannot L1-normalize");
    }
  }
  return out;
}

Matrix l1_distance_matrix(std::span<const std::vector<double>> vectors) {
  const std::size_t n = vectors.size();
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) throw std::invalid_argument("l1_distance_matrix: length mismatch");
  }
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t i) {
    const auto& a = vectors[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = vectors[j];
      double sum = 0.0;
      for (std::size_t t = 0; t < a.size(); ++t) sum += std::abs(a[t] - b[t]);
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
    }
  });
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) d(j, i) = d(i, j);
  }
  return d;
}

AffinityMatrix to_affinity(const Matrix& distance, Domain domain) {
  const Eigen::Index n = distance.rows();
  if (n != distance.cols()) throw std::invalid_argument("to_affinity: matrix is not square");
  if (n < 2) throw std::invalid_argument("to_affinity: need at least 2 rows");
  double max_d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (distance(i, i) != 0.0) throw std::invalid_argument("to_affinity: non-zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = distance(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("to_affinity: negative or non-finite entry");
      if (v != distance(j, i)) throw std::invalid_argument("to_affinity: matrix is not symmetric");
      max_d = std::max(max_d, v);
    }
  }
  if (max_d == 0.0) throw DataError("all pairwise distances are zero; affinity undefined");

  AffinityMatrix out;
  out.domain = domain;
  out.values.resize(n, n);
  double upper = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = 1.0 - distance(i, j) / max_d;
      out.values(i, j) = a;
      out.values(j, i) = a;
      upper += a;
    }
  }
  out.norm = 2.0 * upper / (static_cast<double>(n) * static_cast<double>(n - 1));
  return out;
}

Dendrogram cluster_dissimilarity(const Matrix& dissimilarity, Linkage linkage) {
  const auto n = static_cast<std::size_t>(dissimilarity.rows());
  if (dissimilarity.rows() != dissimilarity.cols()) throw std::invalid_argument("cluster: matrix is not square");
  if (n == 0) throw std::invalid_argument("cluster: empty matrix");

  Matrix work = dissimilarity;
  std::vector<bool> active(n, true);
  std::vector<std::size_t> id(n), size(n, 1);
  std::iota(id.begin(), id.end(), std::size_t{0});

  Dendrogram out;
  out.leaves = n;
  out.merges.reserve(n - 1);
  std::vector<std::pair<std::size_t, std::size_t>> children;  // by merge step
  double previous = -std::numeric_limits<double>::infinity();

  for (std::size_t step = 0; step + 1 < n; ++step) {
    // Slot index equals the lowest leaf index in the cluster, so row-major scan order with a
    // strict comparison implements the lowest-pair tie-break.
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double v = work(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }

    // Average/single/complete are monotone; only rounding can produce a tiny inversion.
    double height = best;
    if (height < previous && previous - height <= 1e-12 * std::max(1.0, std::abs(previous))) height = previous;
    previous = height;

    const std::size_t a = std::min(id[bi], id[bj]);
    const std::size_t b = std::max(id[bi], id[bj]);
    const std::size_t ni = size[bi], nj = size[bj];
    out.merges.push_back(Merge{a, b, height, ni + nj});
    children.emplace_back(a, b);

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const auto ki = static_cast<Eigen::Index>(k);
      const double dki = work(ki, static_cast<Eigen::Index>(bi));
      const double dkj = work(ki, static_cast<Eigen::Index>(bj));
      double updated = 0.0;
      switch (linkage) {
        case Linkage::Average:
          updated = (static_cast<double>(ni) * dki + static_cast<double>(nj) * dkj) / static_cast<double>(ni + nj);
          break;
        case Linkage::Single:
          updated = std::min(dki, dkj);
          break;
        case Linkage::Complete:
          updated = std::max(dki, dkj);
          break;
      }
      work(ki, static_cast<Eigen::Index>(bi)) = updated;
      work(static_cast<Eigen::Index>(bi), ki) = updated;
    }
    active[bj] = false;
    id[bi] = n + step;
    size[bi] = ni + nj;
  }

  // Left-before-right traversal from the root; left is the lower cluster id.
  out.leaf_order.reserve(n);
  std::vector<std::size_t> stack{n == 1 ? 0 : 2 * n - 2};
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    if (c < n) {
      out.leaf_order.push_back(c);
    } else {
      const auto [left, right] = children[c - n];
      stack.push_back(right);
      stack.push_back(left);
    }
  }
  return out;
}

Dendrogram hierarchical_cluster(const AffinityMatrix& affinity, Linkage linkage) {
  const Matrix dissimilarity = (Matrix::Ones(affinity.values.rows(), affinity.values.cols()) - affinity.values);
  return cluster_dissimilarity(dissimilarity, linkage);
}

std::vector<std::size_t> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaves;
  if (k < 1 || k > n) {
    throw std::invalid_argument("cut_dendrogram: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  // Union-find over all cluster ids (leaves and internal nodes).
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t s = 0; s < n - k; ++s) {
    const auto& m = dendrogram.merges[s];
    parent[find(m.cluster_a)] = n + s;
    parent[find(m.cluster_b)] = n + s;
  }

  std::vector<std::size_t> labels(n);
  std::vector<std::size_t> root_label(2 * n, std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] == std::numeric_limits<std::size_t>::max()) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

}  // namespace streamgov::temporal
