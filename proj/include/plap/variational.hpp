#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "plap/graph.hpp"
#include "plap/operators.hpp"
#include "plap/report.hpp"
#include "plap/sparse.hpp"

namespace plap {

/// Linearization of the constrained energy at u, restricted to the unlabeled
/// vertices (ascending vertex order).
///
/// a_ij = w_ij |u_i - u_j|^{p-2} between unlabeled vertices, b_ij the same
/// towards labeled vertices, d_i the full row sum, L = D - A, rhs = B g - f.
/// The gradient of J_p is L u - rhs and its Hessian (p - 1) L.
struct NewtonSystem {
  std::vector<std::size_t> unlabeled;
  std::vector<std::size_t> row_of;  // vertex -> row, npos for labeled vertices
  SparseMatrix L;
  std::vector<double> rhs;
  std::vector<double> diag;
  double p = 2.0;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Values of u on the unlabeled vertices.
  std::vector<double> restrict_field(const ScalarField& u) const;
  /// L u_U - rhs.
  std::vector<double> gradient(const ScalarField& u) const;
};

NewtonSystem assemble_newton_system(const WeightedGraph& graph, const ScalarField& u,
                                    const LabelSet& labels, double p);

struct NewtonStepResult {
  ScalarField u;
  LinearSolveReport linear;
  bool regularized = false;  // the L + mu I retry was used
};

/// u+ = ((p-2)/(p-1)) u + (1/(p-1)) L^{-1}(B g - f) on the unlabeled vertices,
/// computed as u + step_scale * delta with delta = L^{-1}(rhs - L u)/(p - 1).
/// A failing linear solve is retried once with L + mu I, mu = 1e-10 max diag;
/// a second failure throws SolverError.
NewtonStepResult newton_step(const NewtonSystem& system, const ScalarField& u,
                             const LabelSet& labels, const LinearSolverOptions& linear,
                             double step_scale = 1.0);

/// Increasing ladder of p values; each stage warm-starts from the previous one.
struct HomotopySchedule {
  std::vector<double> ladder;
  /// Tolerance for intermediate stages; the solver tolerance when unset.
  std::optional<double> stage_tol;

  /// {3,4,6,8,10,15,20,25,30,40,50} cut below p_target, extended by factors
  /// of 1.25 past 50, always ending at p_target.
  static HomotopySchedule standard(double p_target);
  /// Throws unless strictly increasing, first entry >= 3 and last == p_target.
  void validate(double p_target) const;
};

struct SolverConfig {
  double tol = 1e-10;           // scaled residual
  std::size_t max_outer = 50;   // Newton iterations per stage
  std::size_t dim = 1;          // d in the residual scaling
  LinearSolverOptions linear;
  std::uint64_t seed = 0;
};

struct SolveResult {
  ScalarField u;
  SolveReport report;
};

/// The p = 2 solution: one SPD solve of the graph Laplace problem.
SolveResult solve_laplace(const WeightedGraph& graph, const LabelSet& labels,
                          const SolverConfig& cfg);

/// Newton's method for the constrained minimization of J_p, started from the
/// p = 2 solution, with homotopy on p when a schedule is given.
SolveResult solve_variational(const WeightedGraph& graph, const LabelSet& labels,
                              double p_target,
                              const std::optional<HomotopySchedule>& schedule,
                              const SolverConfig& cfg);

/// Throws std::invalid_argument unless the graph is symmetric and connected and
/// the labels are valid and nonempty.
void check_problem(const WeightedGraph& graph, const LabelSet& labels);

}  // namespace plap
