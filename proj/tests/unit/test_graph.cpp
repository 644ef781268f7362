#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "plap/graph.hpp"
#include "plap/kernel.hpp"
#include "plap/synthetic.hpp"

using namespace plap;

namespace {

PointCloud line(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return PointCloud(n, 1, std::move(xs));
}

// O(n^2) symmetrized K-NN relation with lowest-index tie breaking.
std::set<std::pair<std::size_t, std::size_t>> brute_knn_edges(const PointCloud& pts,
                                                              std::size_t K) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) d.push_back({pts.squared_distance(i, j), j});
    }
    std::sort(d.begin(), d.end());
    for (std::size_t t = 0; t < K; ++t) {
      out.insert({i, d[t].second});
      out.insert({d[t].second, i});
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("core_graph") {
  TEST_CASE("knn_graph on two points") {
    const WeightedGraph g = knn_graph(line({0.0, 1.0}), 1);
    CHECK(g.nnz() == 2);
    CHECK(g.sigma() == doctest::Approx(0.5));
    CHECK(g.weight(0, 1) == doctest::Approx(std::exp(-4.0)));
    CHECK(g.weight(1, 0) == g.weight(0, 1));
  }

  TEST_CASE("knn_graph collinear ties go to the lowest index") {
    const WeightedGraph g = knn_graph(line({0.0, 1.0, 2.0, 3.0}), 1);
    // 1 has neighbors 0 and 2 at equal distance and picks 0; 2 picks 1.
    CHECK(g.nnz() == 6);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(g.weight(i, i + 1) == doctest::Approx(std::exp(-4.0)));
    }
    CHECK(g.weight(0, 2) == 0.0);
    CHECK(g.weight(1, 3) == 0.0);
  }

  TEST_CASE("knn_graph rejects K >= n") {
    CHECK_THROWS_AS(knn_graph(line({0.0, 1.0}), 2), std::invalid_argument);
  }

  TEST_CASE("knn_graph duplicate points give weight one and a warning") {
    const WeightedGraph g = knn_graph(line({0.0, 0.0, 1.0}), 1);
    CHECK(g.weight(0, 1) == 1.0);
    CHECK_FALSE(g.warnings().empty());
  }

  TEST_CASE("knn_graph matches the brute-force symmetrized relation") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PointCloud pts = uniform_cube(150 + 10 * seed, 3, seed);
      const std::size_t K = 4 + seed;
      const WeightedGraph g = knn_graph(pts, K);
      const auto expected = brute_knn_edges(pts, K);
      std::set<std::pair<std::size_t, std::size_t>> got;
      double longest = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t t = 0; t < g.neighbors(i).size(); ++t) {
          const std::size_t j = g.neighbors(i)[t];
          const double w = g.weights(i)[t];
          got.insert({i, j});
          CHECK(w > 0.0);
          CHECK(w <= 1.0);
          CHECK(g.weight(j, i) == w);
          longest = std::max(longest, pts.distance(i, j));
        }
      }
      CHECK(got == expected);
      CHECK(g.sigma() == longest / 2.0);
      CHECK(edge_length_scale(g, pts) == g.sigma());
    }
  }

  TEST_CASE("tree and brute-force neighbor search agree") {
    const PointCloud pts = uniform_cube(600, 3, 11);
    const WeightedGraph a = knn_graph(pts, 7, WeightRule::gaussian, 0);
    const WeightedGraph b = knn_graph(pts, 7, WeightRule::gaussian, 100000);
    CHECK(a.columns() == b.columns());
    CHECK(a.values() == b.values());
    NeighborSearch tree(pts, 0), brute(pts, 100000);
    CHECK(tree.uses_tree());
    CHECK_FALSE(brute.uses_tree());
    for (std::size_t i = 0; i < pts.size(); i += 37) {
      const auto x = tree.within(i, 0.04);
      const auto y = brute.within(i, 0.04);
      REQUIRE(x.size() == y.size());
      for (std::size_t t = 0; t < x.size(); ++t) CHECK(x[t].index == y[t].index);
    }
  }

  TEST_CASE("eps_graph") {
    const Kernel k = Kernel::gaussian(1);
    SUBCASE("far points give no edges") {
      CHECK(eps_graph(line({0.0, 1.0, 2.0}), 0.5, k).nnz() == 0);
    }
    SUBCASE("spacing 0.4 with eps 0.5 links consecutive points") {
      const WeightedGraph g = eps_graph(line({0.0, 0.4, 0.8}), 0.5, k);
      CHECK(g.nnz() == 4);
      CHECK(g.weight(0, 1) == doctest::Approx(std::exp(-2.56)).epsilon(1e-12));
      CHECK(g.weight(1, 2) == doctest::Approx(std::exp(-2.56)).epsilon(1e-12));
      CHECK(g.weight(0, 2) == 0.0);
    }
    SUBCASE("scaling the kernel scales the weights") {
      const PointCloud pts = uniform_cube(100, 2, 3);
      const WeightedGraph a = eps_graph(pts, 0.2, k);
      const WeightedGraph b = eps_graph(pts, 0.2, k.scaled(2.5));
      REQUIRE(a.columns() == b.columns());
      for (std::size_t t = 0; t < a.nnz(); ++t) {
        CHECK(b.values()[t] == doctest::Approx(2.5 * a.values()[t]).epsilon(1e-14));
      }
    }
    SUBCASE("eps <= 0 is rejected") {
      CHECK_THROWS_AS(eps_graph(line({0.0, 1.0}), 0.0, k), std::invalid_argument);
    }
  }

  TEST_CASE("knn_radii") {
    const KnnRadii r = knn_radii(line({0.0, 1.0, 3.0}), 1);
    CHECK(r.eps_k == std::vector<double>{1.0, 1.0, 2.0});
    const KnnRadii far = knn_radii(line({0.0, 1.0, 3.0}), 2);
    CHECK(far.eps_k == std::vector<double>{3.0, 2.0, 3.0});
    const KnnRadii grid = knn_radii(line({0.0, 0.25, 0.5, 0.75, 1.0}), 1);
    for (double e : grid.eps_k) CHECK(e == doctest::Approx(0.25));
    CHECK_THROWS_AS(knn_radii(line({0.0, 1.0}), 2), std::invalid_argument);
  }

  TEST_CASE("knn_radii equals the closed-ball counting definition") {
    // eps_k(x) = min{eps : #{y != x : |x - y| <= eps} >= k}
    const PointCloud pts = uniform_cube(300, 2, 5);
    const std::size_t k = 9;
    const KnnRadii r = knn_radii(pts, k);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::vector<double> d;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j != i) d.push_back(pts.distance(i, j));
      }
      std::size_t inside = 0;
      for (double x : d) inside += x <= r.eps_k[i];
      CHECK(inside >= k);
      std::size_t strictly = 0;
      for (double x : d) strictly += x < r.eps_k[i];
      CHECK(strictly < k);
    }
  }

  TEST_CASE("knn_kernel_graph") {
    const Kernel k = Kernel::gaussian(1);
    SUBCASE("two points give weight eta(1) in both modes") {
      for (KnnMode m : {KnnMode::nonsymmetric, KnnMode::symmetric}) {
        const WeightedGraph g = knn_kernel_graph(line({0.0, 1.0}), 1, k, m);
        CHECK(g.weight(0, 1) == doctest::Approx(k(1.0)));
        CHECK(g.weight(1, 0) == doctest::Approx(k(1.0)));
      }
    }
    SUBCASE("symmetric scale is the larger radius") {
      const WeightedGraph g = knn_kernel_graph(line({0.0, 1.0, 3.0}), 1, k, KnnMode::symmetric);
      CHECK(g.weight(1, 2) == doctest::Approx(k(1.0)));
      CHECK(g.weight(2, 1) == g.weight(1, 2));
      CHECK(g.weight(0, 1) == doctest::Approx(k(1.0)));
      CHECK(g.is_symmetric());
    }
    SUBCASE("nonsymmetric graph is flagged and directed") {
      const WeightedGraph g =
          knn_kernel_graph(line({0.0, 1.0, 3.0}), 1, k, KnnMode::nonsymmetric);
      CHECK_FALSE(g.is_symmetric());
      CHECK(g.weight(2, 1) == doctest::Approx(k(1.0)));  // eps_k(2) = 2
      CHECK(g.weight(1, 2) == 0.0);                     // beyond eps_k(1) = 1
    }
    SUBCASE("symmetric weights equal their transpose and degrees match") {
      const PointCloud pts = uniform_cube(400, 2, 8);
      const WeightedGraph g = knn_kernel_graph(pts, 12, k, KnnMode::symmetric);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double deg = 0.0;
        for (std::size_t t = 0; t < g.neighbors(i).size(); ++t) {
          CHECK(g.weight(g.neighbors(i)[t], i) == g.weights(i)[t]);
          deg += g.weights(i)[t];
        }
        CHECK(g.degree(i) == doctest::Approx(deg).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("ratio eps_k / s_k is close to one for uniform samples") {
    // s_k = (k / (n alpha(d)))^{1/d} for rho = 1; interior vertices only.
    const std::size_t n = 20000, k = 100, d = 2;
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const PointCloud pts = uniform_cube(n, d, seed);
      const KnnRadii r = knn_radii(pts, k);
      const double s = std::sqrt(static_cast<double>(k) / (n * unit_ball_volume(d)));
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = pts.point(i);
        if (std::min({x[0], x[1], 1 - x[0], 1 - x[1]}) > 0.2) {
          ratios.push_back(r.eps_k[i] / s);
        }
      }
    }
    std::sort(ratios.begin(), ratios.end());
    CHECK(ratios[ratios.size() / 2] == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("weights are invariant under rigid motions") {
    const PointCloud pts = uniform_cube(200, 2, 9);
    const double c = std::cos(0.7), s = std::sin(0.7);
    std::vector<double> moved;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto x = pts.point(i);
      moved.push_back(c * x[0] - s * x[1] + 3.0);
      moved.push_back(s * x[0] + c * x[1] - 1.0);
    }
    const PointCloud q(pts.size(), 2, moved);
    const Kernel k = Kernel::gaussian(2);
    const WeightedGraph a = eps_graph(pts, 0.15, k), b = eps_graph(q, 0.15, k);
    REQUIRE(a.columns() == b.columns());
    for (std::size_t t = 0; t < a.nnz(); ++t) {
      CHECK(std::abs(a.values()[t] - b.values()[t]) < 1e-12);
    }
    const WeightedGraph ka = knn_kernel_graph(pts, 8, k, KnnMode::symmetric);
    const WeightedGraph kb = knn_kernel_graph(q, 8, k, KnnMode::symmetric);
    REQUIRE(ka.columns() == kb.columns());
    for (std::size_t t = 0; t < ka.nnz(); ++t) {
      CHECK(std::abs(ka.values()[t] - kb.values()[t]) < 1e-12);
    }
  }

  TEST_CASE("is_connected") {
    CHECK(is_connected(fixtures::path(5)));
    const WeightedGraph two = WeightedGraph::from_edges(
        4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
    CHECK_FALSE(is_connected(two));
    const SyntheticProblem s = problem_s(10000, 10, 10, 1);
    CHECK(is_connected(knn_graph(s.points, 10)));
  }

  TEST_CASE("from_edges validation") {
    CHECK_THROWS_AS(WeightedGraph::from_edges(2, {{0, 1, 1.0}, {0, 1, 2.0}}),
                    std::invalid_argument);
    CHECK_FALSE(WeightedGraph::from_edges(2, {{0, 1, 1.0}}).is_symmetric());
  }
}
