#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "helpers.hpp"
#include "oracles.hpp"
#include "streamgov/error.hpp"
#include "streamgov/synth.hpp"
#include "streamgov/temporal.hpp"

using namespace streamgov;
using namespace streamgov::temporal;

namespace {

Matrix random_distance(CounterRng& rng, std::size_t n) {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) d(i, j) = d(j, i) = 0.01 + rng.uniform();
  }
  return d;
}

/// Leaf sets of every merge, by replaying cluster ids.
std::vector<std::set<std::size_t>> merge_sets(const Dendrogram& d) {
  std::vector<std::set<std::size_t>> members(d.leaves);
  for (std::size_t i = 0; i < d.leaves; ++i) members[i] = {i};
  std::vector<std::set<std::size_t>> out;
  for (const auto& m : d.merges) {
    std::set<std::size_t> s = members.at(m.cluster_a);
    s.insert(members.at(m.cluster_b).begin(), members.at(m.cluster_b).end());
    CHECK(s.size() == m.size);
    members.push_back(s);
    out.push_back(s);
  }
  return out;
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::size_t, std::size_t> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

AffinityMatrix affinity_of(const Matrix& a) { return {a, 0.0, Domain::Temporal}; }

}  // namespace

TEST_CASE("normalize_l1") {
  std::vector<double> a{1, 3};
  CHECK(normalize_l1(a) == std::vector<double>{0.25, 0.75});
  std::vector<double> b{5, 5, 5, 5};
  CHECK(normalize_l1(b) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  std::vector<double> z{0, 0};
  CHECK_THROWS(normalize_l1(z));

  auto c = testutil::make_collection({{1, 1}, {0, 0}});
  try {
    normalize_l1(c);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("S01") != std::string::npos);
  }
}

TEST_CASE("l1 distances") {
  std::vector<std::vector<double>> v{{0.25, 0.75}, {0.5, 0.5}, {1, 0}, {0, 1}};
  Matrix d = l1_distance_matrix(v);
  CHECK(d(0, 1) == doctest::Approx(0.5));
  CHECK(d(0, 0) == 0.0);
  CHECK(d(2, 3) == doctest::Approx(2.0));
  CHECK(d(3, 2) == d(2, 3));
}

TEST_CASE("property: temporal distance is a metric") {
  CounterRng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t t = 1 + rng.below(50);
    std::vector<std::vector<double>> v;
    for (int k = 0; k < 3; ++k) v.push_back(normalize_l1(testutil::uniform_vector(rng, t, 0.0, 10.0)));
    Matrix d = temporal_distance({v});
    CHECK(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-15);
    CHECK(d(0, 1) <= d(0, 2) + d(2, 1) + 1e-15);
    CHECK(d(1, 2) <= d(1, 0) + d(0, 2) + 1e-15);
    CHECK(d(0, 1) <= 2.0 + 1e-15);
  }
}

TEST_CASE("to_affinity examples") {
  Matrix d2(2, 2);
  d2 << 0, 2, 2, 0;
  auto a2 = to_affinity(d2, Domain::Temporal);
  CHECK(a2.values(0, 1) == 0.0);
  CHECK(a2.values(0, 0) == 1.0);
  CHECK(a2.norm == 0.0);

  Matrix d3(3, 3);
  d3 << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  auto a3 = to_affinity(d3, Domain::Spectral);
  CHECK(a3.values(0, 1) == doctest::Approx(0.5));
  CHECK(a3.values(0, 2) == doctest::Approx(0.0));
  CHECK(a3.values(1, 2) == doctest::Approx(0.5));
  CHECK(a3.norm == doctest::Approx(1.0 / 3.0));
  CHECK(a3.domain == Domain::Spectral);

  CHECK_THROWS_AS(to_affinity(Matrix::Zero(3, 3), Domain::Temporal), DataError);
  Matrix asym = d3;
  asym(0, 1) = 1.5;
  CHECK_THROWS_AS(to_affinity(asym, Domain::Temporal), std::invalid_argument);
  Matrix neg = d3;
  neg(0, 1) = neg(1, 0) = -1.0;
  CHECK_THROWS_AS(to_affinity(neg, Domain::Temporal), std::invalid_argument);
}

TEST_CASE("property: affinity invariants and scale invariance") {
  CounterRng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    Matrix d = random_distance(rng, n);
    auto a = to_affinity(d, Domain::Temporal);
    CHECK(a.values.minCoeff() >= 0.0);
    CHECK(a.values.maxCoeff() <= 1.0);
    CHECK(a.values.diagonal().isOnes());
    CHECK(a.values == a.values.transpose());
    CHECK(a.norm >= 0.0);
    CHECK(a.norm <= 1.0);
    const double c = std::ldexp(0.5 + rng.uniform(), static_cast<int>(rng.below(40)) - 20);
    auto ac = to_affinity(d * c, Domain::Temporal);
    CHECK((ac.values - a.values).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(ac.norm - a.norm) <= 1e-12);
  }
}

TEST_CASE("hierarchical clustering small cases") {
  Matrix a2(2, 2);
  a2 << 1, 0.3, 0.3, 1;
  auto d2 = hierarchical_cluster(affinity_of(a2));
  REQUIRE(d2.merges.size() == 1);
  CHECK(d2.merges[0].height == doctest::Approx(0.7));
  CHECK(d2.merges[0].size == 2);

  Matrix a3(3, 3);
  a3 << 1, 0.9, 0.1, 0.9, 1, 0.1, 0.1, 0.1, 1;
  auto d3 = hierarchical_cluster(affinity_of(a3));
  REQUIRE(d3.merges.size() == 2);
  CHECK(d3.merges[0].cluster_a == 0);
  CHECK(d3.merges[0].cluster_b == 1);
  CHECK(d3.merges[0].height == doctest::Approx(0.1));
  CHECK(d3.merges[1].cluster_a == 2);
  CHECK(d3.merges[1].cluster_b == 3);
  CHECK(d3.merges[1].height == doctest::Approx(0.9));
  CHECK(d3.leaf_order.size() == 3);
}

TEST_CASE("single and complete linkage on a chain") {
  // Points at 0, 1, 3 on a line.
  Matrix d(3, 3);
  d << 0, 1, 3, 1, 0, 2, 3, 2, 0;
  auto s = cluster_dissimilarity(d, Linkage::Single);
  auto c = cluster_dissimilarity(d, Linkage::Complete);
  auto a = cluster_dissimilarity(d, Linkage::Average);
  CHECK(s.merges[1].height == doctest::Approx(2.0));
  CHECK(c.merges[1].height == doctest::Approx(3.0));
  CHECK(a.merges[1].height == doctest::Approx(2.5));
}

TEST_CASE("ties merge the lowest-index pair first") {
  Matrix d = Matrix::Constant(4, 4, 1.0);
  d.diagonal().setZero();
  auto den = cluster_dissimilarity(d);
  CHECK(den.merges[0].cluster_a == 0);
  CHECK(den.merges[0].cluster_b == 1);
  // Every remaining pair ties at 1; the slot holding leaf 0 pairs with leaf 2.
  CHECK(den.merges[1].cluster_a == 2);
  CHECK(den.merges[1].cluster_b == 4);
  CHECK(den.merges[2].cluster_a == 3);
  CHECK(den.merges[2].cluster_b == 5);
}

TEST_CASE("oracle: average linkage matches the brute-force reference") {
  CounterRng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix d = random_distance(rng, 8);
    auto a = to_affinity(d, Domain::Temporal);
    Matrix dis = Matrix::Ones(8, 8) - a.values;
    auto expected = oracle::brute_average_linkage(dis);
    auto got = hierarchical_cluster(a);
    REQUIRE(got.merges.size() == 7);
    auto sets = merge_sets(got);
    for (std::size_t s = 0; s < 7; ++s) {
      CHECK(sets[s] == expected[s].members);
      CHECK(got.merges[s].height == doctest::Approx(expected[s].height).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: clustering is permutation invariant") {
  CounterRng rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix d = random_distance(rng, 8);
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 7; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    Matrix p(8, 8);
    for (Eigen::Index i = 0; i < 8; ++i) {
      for (Eigen::Index j = 0; j < 8; ++j) p(i, j) = d(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
    }
    auto base = merge_sets(hierarchical_cluster(to_affinity(d, Domain::Temporal)));
    auto permuted = merge_sets(hierarchical_cluster(to_affinity(p, Domain::Temporal)));
    for (std::size_t s = 0; s < base.size(); ++s) {
      std::set<std::size_t> mapped;
      for (auto leaf : permuted[s]) mapped.insert(perm[leaf]);
      CHECK(mapped == base[s]);
    }
  }
}

TEST_CASE("dendrogram structure") {
  CounterRng rng(4);
  Matrix d = random_distance(rng, 12);
  auto den = hierarchical_cluster(to_affinity(d, Domain::Temporal));
  CHECK(den.leaves == 12);
  for (std::size_t s = 1; s < den.merges.size(); ++s) CHECK(den.merges[s].height >= den.merges[s - 1].height);
  CHECK(den.merges.back().size == 12);
  auto order = den.leaf_order;
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < 12; ++i) CHECK(order[i] == i);
}

TEST_CASE("cut_dendrogram") {
  CounterRng rng(8);
  Matrix d = random_distance(rng, 6);
  auto den = hierarchical_cluster(to_affinity(d, Domain::Temporal));
  auto all = cut_dendrogram(den, 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(all[i] == i);
  auto one = cut_dendrogram(den, 1);
  for (auto l : one) CHECK(l == 0);
  CHECK_THROWS_AS(cut_dendrogram(den, 0), std::invalid_argument);
  CHECK_THROWS_AS(cut_dendrogram(den, 7), std::invalid_argument);

  Matrix a3(3, 3);
  a3 << 1, 0.9, 0.1, 0.9, 1, 0.1, 0.1, 0.1, 1;
  auto two = cut_dendrogram(hierarchical_cluster(affinity_of(a3)), 2);
  CHECK(two == std::vector<std::size_t>{0, 0, 1});
}

TEST_CASE("identical trajectories give unit affinity off the diagonal") {
  std::vector<std::vector<double>> v{{0.5, 0.5}, {0.5, 0.5}, {1.0, 0.0}};
  auto a = to_affinity(l1_distance_matrix(v), Domain::Temporal);
  CHECK(a.values(0, 1) == 1.0);
}

TEST_CASE("planted two-block collection is recovered at k = 2") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    synth::SynthSpec spec;
    spec.shape = synth::Template::TwoBlock;
    spec.stations = 20;
    spec.days = 3650;
    spec.noise_std = 0.01;
    spec.seed = seed;
    auto syn = synth::generate(spec);
    auto a = to_affinity(temporal_distance(normalize_l1(syn.collection)), Domain::Temporal);
    auto labels = cut_dendrogram(hierarchical_cluster(a), 2);
    CHECK(same_partition(labels, syn.labels));
  }
}
