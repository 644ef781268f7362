#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "plap/game.hpp"
#include "plap/graph.hpp"
#include "plap/synthetic.hpp"

using namespace plap;

namespace {

const LabelSet kEnds({0, 2}, {0.0, 1.0});

GameConfig config(PExponent p, double tol) {
  GameConfig c;
  c.p = p;
  c.tol = tol;
  c.linear.tol = 1e-13;
  return c;
}

struct Instance {
  WeightedGraph graph;
  LabelSet labels;
};

Instance instance(std::size_t n, std::uint64_t seed) {
  const SyntheticProblem prob = problem_s(n, 2, 6, seed);
  return {knn_graph(prob.points, 10), prob.labels};
}

}  // namespace

TEST_SUITE("game_solver") {
  TEST_CASE("max_alpha") {
    CHECK(max_alpha(PExponent(3.0)) == doctest::Approx(1.0));
    CHECK(max_alpha(PExponent::infinity()) == doctest::Approx(0.5));
    CHECK(max_alpha(PExponent(3.0), 0.1) == doctest::Approx(3.0 / (2.1 * 3 - 3)));
    CHECK(max_alpha(PExponent::infinity(), 0.1) == doctest::Approx(1.0 / 2.1));
  }

  TEST_CASE("gradient descent on the path converges in one step") {
    GameConfig c = config(PExponent(3.0), 1e-12);
    const SolveResult r = gradient_descent_solve(fixtures::path(3), kEnds, c);
    CHECK(r.u[1] == doctest::Approx(0.5));
    CHECK(r.report.total_iterations() == 1);
    REQUIRE_FALSE(r.report.bracket_width_history.empty());
    CHECK(r.report.bracket_width_history.back() == doctest::Approx(0.0));
    CHECK(*r.report.alpha == doctest::Approx(1.0));
  }

  TEST_CASE("alpha above the comparison bound is rejected") {
    GameConfig c = config(PExponent(3.0), 1e-6);
    c.alpha = 1.01;
    CHECK_THROWS_AS(gradient_descent_solve(fixtures::path(3), kEnds, c), std::invalid_argument);
    c.alpha = 0.9;
    c.eps_reg = 0.1;  // bound becomes 3/3.3
    CHECK_NOTHROW(gradient_descent_solve(fixtures::path(3), kEnds, c));
    c.alpha = 0.95;
    CHECK_THROWS_AS(gradient_descent_solve(fixtures::path(3), kEnds, c), std::invalid_argument);
  }

  TEST_CASE("weights above one are normalized and recorded") {
    const WeightedGraph heavy = fixtures::path(3, 4.0);
    double factor = 0.0;
    const WeightedGraph w = normalize_weights(heavy, factor);
    CHECK(factor == doctest::Approx(0.25));
    CHECK(w.max_weight() == doctest::Approx(1.0));
    const SolveResult r = gradient_descent_solve(heavy, kEnds, config(PExponent(3.0), 1e-9));
    CHECK(r.u[1] == doctest::Approx(0.5));
    CHECK(r.report.weight_normalization.has_value());
  }

  TEST_CASE("a source switches gradient descent to the residual-stopped fallback") {
    const LabelSet src({0, 2}, {0.0, 1.0}, {0.0, 0.05, 0.0});
    const SolveResult r = gradient_descent_solve(fixtures::path(3), src, config(PExponent(3.0), 1e-10));
    CHECK(r.report.bracket_fallback);
    CHECK(game_scaled_residual(fixtures::path(3), r.u, src, PExponent(3.0)) <= 1e-10);
  }

  TEST_CASE("Newton-like system on the path") {
    const NewtonLikeSystem s = assemble_newton_like(fixtures::path(3), {0.0, 0.3, 1.0}, kEnds,
                                                    PExponent(3.0));
    REQUIRE(s.unlabeled == std::vector<std::size_t>{1});
    CHECK(s.y_plus[0] == 0);   // argmax of u(x) - u(y): y = 0
    CHECK(s.y_minus[0] == 2);  // argmin: y = 2
    CHECK(s.beta[0] == std::vector<double>{3.0, 3.0});
    const SolveResult r =
        newton_like_solve(fixtures::path(3), kEnds, config(PExponent(3.0), 1e-12));
    CHECK(r.u[1] == doctest::Approx(0.5));
  }

  TEST_CASE("Newton-like p = 2 is a single Laplace solve with beta = w") {
    const Instance in = instance(200, 1);
    const ScalarField u = in.labels.impose(fixtures::random_field(200, 3));
    const NewtonLikeSystem s = assemble_newton_like(in.graph, u, in.labels, PExponent(2.0));
    for (std::size_t r = 0; r < s.unlabeled.size(); ++r) {
      const auto ws = in.graph.weights(s.unlabeled[r]);
      for (std::size_t t = 0; t < ws.size(); ++t) CHECK(s.beta[r][t] == ws[t]);
    }
    SolverConfig lap;
    lap.linear.tol = 1e-13;
    const SolveResult a = solve_laplace(in.graph, in.labels, lap);
    const SolveResult b = newton_like_solve(in.graph, in.labels, config(PExponent(2.0), 1e-10));
    CHECK(fixtures::sup_diff(a.u, b.u) < 1e-8);
  }

  TEST_CASE("Newton-like beta carries the boost exactly on y+ and y-") {
    const Instance in = instance(150, 2);
    const ScalarField u = in.labels.impose(fixtures::random_field(150, 4));
    const NewtonLikeSystem s = assemble_newton_like(in.graph, u, in.labels, PExponent(5.0));
    for (std::size_t r = 0; r < s.unlabeled.size(); ++r) {
      const std::size_t x = s.unlabeled[r];
      const auto nb = in.graph.neighbors(x);
      const auto ws = in.graph.weights(x);
      for (std::size_t t = 0; t < nb.size(); ++t) {
        CHECK(s.beta[r][t] >= ws[t]);
        const bool boosted = nb[t] == s.y_plus[r] || nb[t] == s.y_minus[r];
        CHECK((s.beta[r][t] > ws[t]) == boosted);
      }
    }
  }

  TEST_CASE("Newton-like rejects p = inf") {
    CHECK_THROWS_AS(newton_like_solve(fixtures::path(3), kEnds, config(PExponent::infinity(), 1e-6)),
                    std::invalid_argument);
  }

  TEST_CASE("semi-implicit theta and coefficients") {
    const WeightedGraph g = fixtures::path(3);
    const auto t2 = semi_implicit_theta(g, PExponent(2.0), ThetaPolicy::minimal, 1.0);
    for (double t : t2) CHECK(t == doctest::Approx(1.0));
    const auto ti = semi_implicit_theta(g, PExponent::infinity(), ThetaPolicy::minimal, 1.0);
    CHECK(ti[1] == doctest::Approx(2.0));  // d_x
    const auto t3 = semi_implicit_theta(g, PExponent(3.0), ThetaPolicy::minimal, 1.0);
    CHECK(t3[1] == doctest::Approx(4.0 / 3.0));
    // beta = (theta p - 2)/(theta p) = 1/2, gamma = d (p - 2)/(theta p - 2) = 1
    const double th = t3[1];
    CHECK((th * 3 - 2) / (th * 3) == doctest::Approx(0.5));
    CHECK(2.0 * 1.0 / (th * 3 - 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(semi_implicit_theta(g, PExponent(3.0), ThetaPolicy::constant, 1.0),
                    std::invalid_argument);
    CHECK_NOTHROW(semi_implicit_theta(g, PExponent(3.0), ThetaPolicy::constant, 2.0));
  }

  TEST_CASE("semi-implicit is stationary at the exact solution") {
    const SolveResult r = semi_implicit_solve(fixtures::path(3), kEnds, config(PExponent(3.0), 1e-12));
    CHECK(r.u[1] == doctest::Approx(0.5));
    CHECK(r.report.final_residual <= 1e-12);
  }

  TEST_CASE("comparison principle for one update") {
    std::mt19937_64 rng(17);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const WeightedGraph g = fixtures::random_graph(60, 120, seed);
      const LabelSet labels = fixtures::random_labels(4, seed);
      for (PExponent p : {PExponent(3.0), PExponent(9.0), PExponent::infinity()}) {
        const double alpha = max_alpha(p);
        for (int trial = 0; trial < 100; ++trial) {
          const ScalarField u = labels.impose(fixtures::random_field(60, rng()));
          ScalarField v = u;
          std::uniform_real_distribution<double> bump(0.0, 0.5);
          for (std::size_t i : labels.unlabeled(60)) v[i] += bump(rng);
          const ScalarField u1 = gradient_step(g, u, labels, p, alpha);
          const ScalarField v1 = gradient_step(g, v, labels, p, alpha);
          for (std::size_t i = 0; i < 60; ++i) CHECK(u1[i] <= v1[i] + 1e-12);
        }
      }
    }
  }

  TEST_CASE("bracket sandwich and monotonicity") {
    const Instance in = instance(300, 5);
    const PExponent p(4.0);
    const SolveResult ref = semi_implicit_solve(in.graph, in.labels, config(p, 1e-12));
    const double alpha = max_alpha(p);
    ScalarField hi = in.labels.impose(ScalarField(300, in.labels.max_value()));
    ScalarField lo = in.labels.impose(ScalarField(300, in.labels.min_value()));
    for (int k = 0; k < 300; ++k) {
      const ScalarField hi1 = gradient_step(in.graph, hi, in.labels, p, alpha);
      const ScalarField lo1 = gradient_step(in.graph, lo, in.labels, p, alpha);
      for (std::size_t i = 0; i < 300; ++i) {
        CHECK(hi1[i] <= hi[i] + 1e-12);
        CHECK(lo1[i] >= lo[i] - 1e-12);
        CHECK(lo1[i] <= ref.u[i] + 1e-9);
        CHECK(ref.u[i] <= hi1[i] + 1e-9);
      }
      hi = hi1;
      lo = lo1;
    }
  }

  TEST_CASE("regularized iteration contracts at rate 1 - alpha eps") {
    const Instance in = instance(200, 6);
    const PExponent p(3.0);
    const double eps = 0.1, alpha = max_alpha(p, eps);
    // High-accuracy fixed point by iterating far past machine precision.
    ScalarField fix = in.labels.impose(ScalarField(200, 0.5));
    for (int k = 0; k < 3000; ++k) fix = gradient_step(in.graph, fix, in.labels, p, alpha, eps);
    ScalarField u = in.labels.impose(fixtures::random_field(200, 8));
    double err = fixtures::sup_diff(u, fix);
    for (int k = 0; k < 60 && err > 1e-12; ++k) {
      u = gradient_step(in.graph, u, in.labels, p, alpha, eps);
      const double next = fixtures::sup_diff(u, fix);
      CHECK(next <= (1 - alpha * eps) * err + 1e-13);
      err = next;
    }
    GameConfig c = config(p, 1e-8);
    c.eps_reg = eps;
    const SolveResult r = gradient_descent_solve(in.graph, in.labels, c);
    CHECK(fixtures::sup_diff(r.u, fix) <= 1e-8);
    CHECK(*r.report.eps_reg == eps);
  }

  TEST_CASE("cross-solver agreement and maximum principle") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Instance in = instance(250, 20 + seed);
      for (double pv : {3.0, 9.0}) {
        const double tol = 1e-7;
        const PExponent p(pv);
        const SolveResult gd = gradient_descent_solve(in.graph, in.labels, config(p, tol));
        // Residual-stopped solvers run tighter so that their sup-norm error is
        // well below tol; the bracket bounds gradient descent's error by tol.
        const SolveResult nl = newton_like_solve(in.graph, in.labels, config(p, 1e-11),
                                                 HomotopySchedule::standard(pv));
        const SolveResult si = semi_implicit_solve(in.graph, in.labels, config(p, 1e-11));
        CHECK(fixtures::sup_diff(gd.u, nl.u) <= 10 * tol);
        CHECK(fixtures::sup_diff(gd.u, si.u) <= 10 * tol);
        for (const auto* u : {&gd.u, &nl.u, &si.u}) {
          for (double v : *u) {
            CHECK(v >= in.labels.min_value() - 1e-9);
            CHECK(v <= in.labels.max_value() + 1e-9);
          }
        }
      }
    }
  }

  TEST_CASE("Newton-like exactness once y+- settle") {
    const Instance in = instance(200, 9);
    const PExponent p(5.0);
    SolverConfig lap;
    lap.linear.tol = 1e-13;
    ScalarField u = solve_laplace(in.graph, in.labels, lap).u;
    LinearSolverOptions lin;
    lin.method = LinearMethod::gmres;
    lin.preconditioner = PreconditionerKind::incomplete_lu;
    lin.tol = 1e-13;
    std::vector<std::size_t> prev_plus, prev_minus;
    bool settled = false;
    for (int k = 0; k < 40 && !settled; ++k) {
      const NewtonLikeSystem s = assemble_newton_like(in.graph, u, in.labels, p);
      settled = s.y_plus == prev_plus && s.y_minus == prev_minus;
      prev_plus = s.y_plus;
      prev_minus = s.y_minus;
      const auto sol = solve_linear(s.matrix, s.rhs, lin);
      for (std::size_t r = 0; r < s.unlabeled.size(); ++r) u[s.unlabeled[r]] = sol.x[r];
    }
    REQUIRE(settled);
    CHECK(game_scaled_residual(in.graph, u, in.labels, p) <= 1e-8);
  }

  TEST_CASE("game report fields") {
    const SolveResult r = gradient_descent_solve(fixtures::path(3), kEnds, config(PExponent(3.0), 1e-6));
    const auto j = r.report.to_json();
    for (const char* k : {"alpha", "theta_policy", "bracket_width_history", "eps_reg"}) {
      CHECK(j.contains(k));
    }
  }
}
