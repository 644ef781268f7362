#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "plap/continuum.hpp"
#include "plap/graph.hpp"
#include "plap/kernel.hpp"

using namespace plap;

namespace {

const PExponent kInf = PExponent::infinity();

// Second moment of the Gaussian profile in d = 2 by a tensor midpoint grid.
double sigma_eta_grid(const Kernel& k, int per_axis) {
  const double h = 2.0 / per_axis;
  double s = 0.0;
  for (int i = 0; i < per_axis; ++i) {
    const double x = -1.0 + (i + 0.5) * h;
    for (int j = 0; j < per_axis; ++j) {
      const double y = -1.0 + (j + 0.5) * h;
      const double r = std::hypot(x, y);
      if (r <= 1.0) s += x * x * k(r);
    }
  }
  return s * h * h;
}

}  // namespace

TEST_SUITE("continuum_lab") {
  TEST_CASE("kernel constants") {
    CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
    const Kernel k = Kernel::gaussian(2);
    CHECK(k.r0() == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-10));
    CHECK(k.r0_eta_r0() == doctest::Approx(k.r0() * std::exp(-0.5)).epsilon(1e-10));
    CHECK(k.theta_eta() > 0.0);
    CHECK(k.strict_max_holds());
    CHECK(k.sigma_eta() > 0.0);
    CHECK(k(1.5) == 0.0);
    CHECK(Kernel::bump(2).theta_eta() > 0.0);
  }

  TEST_CASE("sigma_eta agrees with two independent integrators") {
    const Kernel k = Kernel::gaussian(2);
    CHECK(sigma_eta_grid(k, 4000) == doctest::Approx(k.sigma_eta()).epsilon(1e-4));
    // Monte Carlo over the square, loose tolerance (relative std error ~ 3e-3).
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int m = 400000;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x = u(rng), y = u(rng);
      const double r = std::hypot(x, y);
      if (r <= 1.0) s += x * x * k(r);
    }
    CHECK(4.0 * s / m == doctest::Approx(k.sigma_eta()).epsilon(1.5e-2));
  }

  TEST_CASE("kernel validation and scaling") {
    CHECK_THROWS_AS(kernel_constants([](double t) { return t; }, 2), std::invalid_argument);
    CHECK_THROWS_AS(kernel_constants([](double) { return 1.0; }, 2), std::invalid_argument);
    const Kernel k = Kernel::gaussian(2);
    const Kernel s = k.scaled(3.0);
    CHECK(s.sigma_eta() == doctest::Approx(3.0 * k.sigma_eta()));
    CHECK(s.r0() == doctest::Approx(k.r0()));
    CHECK(s(0.3) == doctest::Approx(3.0 * k(0.3)));
  }

  TEST_CASE("densities integrate to one") {
    for (const char* name : {"uniform-linear", "uniform-quadratic", "drift-exp"}) {
      const ContinuumProblem pr = ContinuumProblem::preset(name, 2);
      CHECK(integrate_density(pr, 2000) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(pr.beta() > 0.0);
    }
    CHECK_THROWS_AS(ContinuumProblem::preset("nope", 2), std::invalid_argument);
  }

  TEST_CASE("sample_density") {
    const ContinuumProblem uni = ContinuumProblem::preset("uniform-linear", 3);
    const PointCloud a = sample_density(uni, 500, 4);
    const PointCloud b = sample_density(uni, 500, 4);
    CHECK(a.coords() == b.coords());
    for (double x : a.coords()) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    const ContinuumProblem ex = ContinuumProblem::preset("drift-exp", 2);
    const std::size_t n = 100000;
    const PointCloud pts = sample_density(ex, n, 9);
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = pts.point(i)[0];
      mean += x;
      sq += x * x;
    }
    mean /= n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    const double exact = 1.0 / (std::numbers::e - 1.0);
    CHECK(std::abs(mean - exact) <= 3 * se);
  }

  TEST_CASE("continuum operator examples") {
    const ContinuumProblem quad = ContinuumProblem::preset("uniform-quadratic", 2);
    const std::vector<double> x{0.3, 0.6};
    for (double p : {2.0, 3.0, 10.0}) {
      CHECK(continuum_operator(quad, x, PExponent(p), Family::eps_ball) == doctest::Approx(1.0));
    }
    CHECK(continuum_operator(quad, x, kInf, Family::eps_ball) == doctest::Approx(1.0));
    const ContinuumProblem lin = ContinuumProblem::preset("uniform-linear", 2);
    for (Family f : {Family::eps_ball, Family::knn_nonsym, Family::knn_sym}) {
      CHECK(continuum_operator(lin, x, PExponent(5.0), f) == doctest::Approx(0.0));
    }
    const ContinuumProblem drift = ContinuumProblem::preset("drift-exp", 2);
    const double rho = drift.rho(x);
    CHECK(continuum_operator(drift, x, kInf, Family::knn_sym, Variant::infinity) ==
          doctest::Approx(-0.5 / rho));
    // Undefined where the gradient vanishes: origin of |x|^2 / 2.
    CHECK(std::isnan(continuum_operator(quad, std::vector<double>{0.0, 0.0}, kInf,
                                        Family::eps_ball, Variant::infinity)));
  }

  TEST_CASE("discrete operators annihilate constants") {
    const PointCloud pts = sample_density(ContinuumProblem::preset("uniform-linear", 2), 800, 1);
    const ScalarField c(800, 0.7);
    const Kernel k = Kernel::gaussian(2);
    const std::vector<std::pair<Family, double>> scales{
        {Family::eps_ball, 0.15}, {Family::knn_nonsym, 20}, {Family::knn_sym, 20}};
    for (auto [f, s] : scales) {
      for (Variant v : {Variant::unnormalized, Variant::random_walk, Variant::infinity,
                        Variant::game_p, Variant::knn_unnormalized}) {
        if (v == Variant::unnormalized && f != Family::eps_ball) continue;
        if (v == Variant::knn_unnormalized && f != Family::knn_sym) continue;
        for (double val : discrete_operator(pts, c, f, v, s, PExponent(3.0), k)) {
          CHECK(val == 0.0);
        }
      }
    }
    CHECK_THROWS_AS(discrete_operator(pts, c, Family::knn_nonsym, Variant::unnormalized, 20,
                                      kInf, k),
                    std::invalid_argument);
  }

  TEST_CASE("discrete operators are invariant under kernel scaling") {
    const ContinuumProblem pr = ContinuumProblem::preset("uniform-quadratic", 2);
    const PointCloud pts = sample_density(pr, 1000, 2);
    const ScalarField u = evaluate_u(pr, pts);
    const Kernel k = Kernel::gaussian(2), s = k.scaled(0.37);
    for (auto [f, sc] : std::vector<std::pair<Family, double>>{
             {Family::eps_ball, 0.2}, {Family::knn_nonsym, 25}, {Family::knn_sym, 25}}) {
      for (Variant v : {Variant::random_walk, Variant::infinity, Variant::game_p}) {
        const ScalarField a = discrete_operator(pts, u, f, v, sc, PExponent(4.0), k);
        const ScalarField b = discrete_operator(pts, u, f, v, sc, PExponent(4.0), s);
        for (std::size_t i = 0; i < a.size(); ++i) {
          CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-10).scale(1e-10));
        }
      }
    }
    const ScalarField a = discrete_operator(pts, u, Family::eps_ball, Variant::unnormalized,
                                            0.2, kInf, k);
    const ScalarField b = discrete_operator(pts, u, Family::eps_ball, Variant::unnormalized,
                                            0.2, kInf, s);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]));
  }

  TEST_CASE("k-NN operator equals the rescaled eps-ball operator at radius eps_k") {
    const ContinuumProblem pr = ContinuumProblem::preset("drift-exp", 2);
    const Kernel k = Kernel::gaussian(2);
    const std::size_t n = 1500, kk = 30;
    const PointCloud pts = sample_density(pr, n, 3);
    const ScalarField u = evaluate_u(pr, pts);
    const KnnRadii radii = knn_radii(pts, kk);
    NeighborSearch search(pts, 4096);
    const auto interior = interior_vertices(pts, boundary_margin(Family::knn_nonsym, kk, n, 2, pr.beta()));
    REQUIRE_FALSE(interior.empty());
    for (Variant v : {Variant::random_walk, Variant::infinity, Variant::game_p}) {
      const PExponent p(3.0);
      const ScalarField L = discrete_operator(pts, u, Family::knn_nonsym, v, kk, p, k, interior);
      for (std::size_t i : interior) {
        const double e = radii.eps_k[i];
        const double fac = e * e * (n * std::numbers::pi / kk);  // (n alpha(2) / k)^{2/2}
        const double rhs = fac * eps_operator_at(pts, search, u, i, e, v, p, k);
        CHECK(L[i] == doctest::Approx(rhs).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("empty neighborhood is reported with the vertex") {
    const PointCloud pts(3, 1, {0.0, 0.1, 0.9});
    try {
      discrete_operator(pts, {0.0, 0.1, 0.9}, Family::eps_ball, Variant::random_walk, 0.2,
                        PExponent(2.0), Kernel::gaussian(1));
      FAIL("expected domain_error");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("vertex 2") != std::string::npos);
    }
  }

  TEST_CASE("scale rules and margins") {
    ScaleRule r;
    CHECK(r.eps(1024, 2) == doctest::Approx(2.0 * std::pow(std::log(1024.0) / 1024.0, 1.0 / 6.0)));
    CHECK(r.k(1024, 2) == static_cast<std::size_t>(std::ceil(4.0 * std::pow(std::log(1024.0), 2))));
    r.k_power = 0.6;
    CHECK(r.k(1024, 2) == static_cast<std::size_t>(std::ceil(std::pow(1024.0, 0.6))));
    CHECK(boundary_margin(Family::eps_ball, 0.2, 1000, 2, 1.0) == 0.2);
    CHECK(boundary_margin(Family::knn_sym, 50, 1000, 2, 1.0) ==
          doctest::Approx(3.0 * std::sqrt(50.0 / (1000 * std::numbers::pi))));
    const PointCloud pts(3, 2, {0.5, 0.5, 0.05, 0.5, 0.5, 0.95});
    CHECK(interior_vertices(pts, 0.1) == std::vector<std::size_t>{0});
  }

  TEST_CASE("eps-ball error shrinks for a linear function") {
    const ContinuumProblem pr = ContinuumProblem::preset("uniform-linear", 2);
    ScaleRule r;
    r.eps_const = 0.57;
    const auto rows = consistency_experiment(pr, Family::eps_ball, Variant::random_walk,
                                             PExponent(2.0), {1024, 16384}, {0, 1, 2}, r,
                                             Kernel::gaussian(2));
    REQUIRE(rows.size() == 6);
    std::vector<double> small, large;
    for (const auto& row : rows) (row.n == 1024 ? small : large).push_back(row.err_median);
    CHECK(median(large) < median(small));
    std::ostringstream os;
    write_consistency_csv(os, rows);
    CHECK(os.str().rfind("family,variant,p,n,scale,seed,interior_count,err_median,err_max,"
                         "target_median", 0) == 0);
  }

  TEST_CASE("enum names round trip") {
    for (Family f : {Family::eps_ball, Family::knn_nonsym, Family::knn_sym}) {
      CHECK(family_from_string(to_string(f)) == f);
    }
    for (Variant v : {Variant::unnormalized, Variant::random_walk, Variant::infinity,
                      Variant::game_p, Variant::knn_unnormalized}) {
      CHECK(variant_from_string(to_string(v)) == v);
    }
  }
}
