#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plap/graph.hpp"
#include "plap/operators.hpp"
#include "plap/report.hpp"
#include "plap/sparse.hpp"
#include "plap/variational.hpp"

namespace plap {

enum class ThetaPolicy {
  minimal,   // theta(x) = max(1, eta(x)), eta(x) = 2/p + lambda d_x (1 - 2/p)
  constant,  // theta(x) = theta_value, checked against max(1, eta(x))
};

std::string to_string(ThetaPolicy policy);
ThetaPolicy theta_policy_from_string(const std::string& name);

struct GameConfig {
  PExponent p{3.0};
  std::optional<double> alpha;  // gradient descent step; largest admissible when unset
  double eps_reg = 0.0;         // > 0 selects the regularized iteration
  double tol = 1e-6;
  std::size_t max_iter = 2000000;
  ThetaPolicy theta_policy = ThetaPolicy::minimal;
  double theta_value = 1.0;
  InfinityRange range = InfinityRange::neighbors;
  LinearSolverOptions linear;  // Newton-like switches cg to gmres
  std::size_t stall_window = 50;  // semi-implicit divergence detection
  std::uint64_t seed = 0;
};

/// Largest step with the comparison principle: p/(2p-3), or p/((2+eps)p-3)
/// with regularization; 1/2 (resp. 1/(2+eps)) for p = inf.
double max_alpha(const PExponent& p, double eps_reg = 0.0);

/// The graph divided by its largest weight when that exceeds 1, otherwise a
/// copy; the applied factor is written to `factor`.
WeightedGraph normalize_weights(const WeightedGraph& graph, double& factor);

/// One explicit step u + alpha (L_p u - eps u + f) on the unlabeled vertices,
/// g on the labeled ones.
ScalarField gradient_step(const WeightedGraph& graph, const ScalarField& u,
                          const LabelSet& labels, const PExponent& p, double alpha,
                          double eps_reg = 0.0,
                          InfinityRange range = InfinityRange::neighbors);

/// Gradient descent for -L_p u = f. With f = 0 and eps_reg = 0 it runs the two
/// brackets started at max g and min g, stops once their sup-norm gap is at
/// most 2 tol and returns the midpoint (within tol of the solution). With
/// eps_reg > 0 it runs the regularized iteration and stops when the geometric
/// error bound (1 - alpha eps)^k gap_0 drops below tol. A nonzero source
/// switches to plain iteration stopped on the scaled residual (flagged in the
/// report).
SolveResult gradient_descent_solve(const WeightedGraph& graph, const LabelSet& labels,
                                   const GameConfig& cfg);

/// Linearization used by the Newton-like method at the current iterate.
///
/// Rows are the unlabeled vertices in ascending order. y_plus / y_minus hold
/// the argmax / argmin neighbor of w_xy (u(x) - u(y)) (lowest index on ties),
/// beta the coefficients w_xy (1 + lambda d_x (p - 2)([y = y+] + [y = y-])), and
/// matrix / rhs the system sum_y beta_xy (u(x) - u(y)) = d_x p f(x) with the
/// labeled values moved to the right-hand side.
struct NewtonLikeSystem {
  std::vector<std::size_t> unlabeled;
  std::vector<std::size_t> y_plus;
  std::vector<std::size_t> y_minus;
  std::vector<std::vector<double>> beta;  // per row, aligned with graph.neighbors
  SparseMatrix matrix;
  std::vector<double> rhs;
};

NewtonLikeSystem assemble_newton_like(const WeightedGraph& graph, const ScalarField& u,
                                      const LabelSet& labels, const PExponent& p);

/// Newton-like iteration, warm-started from the p = 2 solution, with optional
/// homotopy. Stops on the game residual scaling. Rejects p = inf.
SolveResult newton_like_solve(const WeightedGraph& graph, const LabelSet& labels,
                              const GameConfig& cfg,
                              const std::optional<HomotopySchedule>& schedule = std::nullopt);

/// theta(x) for the semi-implicit method; throws std::invalid_argument when a
/// constant policy violates theta >= max(1, eta(x)).
std::vector<double> semi_implicit_theta(const WeightedGraph& graph, const PExponent& p,
                                        ThetaPolicy policy, double theta_value);

/// Semi-implicit iteration: the Dirichlet graph Laplacian on the unlabeled
/// vertices is assembled and preconditioned once; each step solves it for the
/// increment (2 d_x / theta(x)) (L_p u + f)(x). Warm-started from p = 2.
SolveResult semi_implicit_solve(const WeightedGraph& graph, const LabelSet& labels,
                                const GameConfig& cfg);

}  // namespace plap
