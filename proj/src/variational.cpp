#include "plap/variational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace plap {

void check_problem(const WeightedGraph& graph, const LabelSet& labels) {
  if (graph.size() == 0) throw std::invalid_argument("empty graph");
  if (!graph.is_symmetric()) {
    throw std::invalid_argument("solvers require a symmetric graph");
  }
  labels.validate(graph.size(), true);
  if (!is_connected(graph)) {
    throw std::invalid_argument("graph is not connected; increase K or the radius");
  }
}

std::vector<double> NewtonSystem::restrict_field(const ScalarField& u) const {
  std::vector<double> x(unlabeled.size());
  for (std::size_t r = 0; r < unlabeled.size(); ++r) x[r] = u[unlabeled[r]];
  return x;
}

std::vector<double> NewtonSystem::gradient(const ScalarField& u) const {
  std::vector<double> g = L.multiply(restrict_field(u));
  for (std::size_t r = 0; r < g.size(); ++r) g[r] -= rhs[r];
  return g;
}

NewtonSystem assemble_newton_system(const WeightedGraph& graph, const ScalarField& u,
                                    const LabelSet& labels, double p) {
  check_field(graph, u);
  labels.validate(graph.size(), true);
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw std::invalid_argument("newton system: p must be finite and >= 2");
  }
  const std::size_t n = graph.size();
  NewtonSystem sys;
  sys.p = p;
  sys.unlabeled = labels.unlabeled(n);
  sys.row_of.assign(n, NewtonSystem::npos);
  for (std::size_t r = 0; r < sys.unlabeled.size(); ++r) sys.row_of[sys.unlabeled[r]] = r;
  const ScalarField full = labels.impose(u);

  const std::size_t m = sys.unlabeled.size();
  sys.rhs.assign(m, 0.0);
  sys.diag.assign(m, 0.0);
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(graph.nnz() + m);
  const bool linear = p == 2.0;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = sys.unlabeled[r];
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    double d = 0.0;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      const std::size_t j = cols[t];
      const double diff = std::abs(full[i] - full[j]);
      const double a = linear ? ws[t] : (diff > 0.0 ? ws[t] * std::pow(diff, p - 2.0) : 0.0);
      if (a == 0.0) continue;
      d += a;
      if (sys.row_of[j] == NewtonSystem::npos) {
        sys.rhs[r] += a * full[j];
      } else {
        trip.push_back({r, sys.row_of[j], -a});
      }
    }
    sys.diag[r] = d;
    trip.push_back({r, r, d});
    sys.rhs[r] -= labels.f(i);
  }
  sys.L = SparseMatrix::from_triplets(m, m, std::move(trip), true);
  return sys;
}

namespace {

SparseMatrix shifted(const SparseMatrix& A, double mu) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(A.nnz() + A.rows());
  const auto& off = A.offsets();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t t = off[i]; t < off[i + 1]; ++t) {
      trip.push_back({i, A.indices()[t], A.values()[t]});
    }
    trip.push_back({i, i, mu});
  }
  return SparseMatrix::from_triplets(A.rows(), A.cols(), std::move(trip), A.is_symmetric());
}

bool finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Solves A x = b with the configured solver; on failure retries with A + mu I.
LinearSolveResult robust_solve(const SparseMatrix& A, const std::vector<double>& b,
                               const LinearSolverOptions& opts, bool& regularized) {
  regularized = false;
  try {
    LinearSolveResult res = solve_linear(A, b, opts);
    if (res.report.converged && finite(res.x)) return res;
  } catch (const std::invalid_argument&) {
    // e.g. jacobi on a zero diagonal; fall through to the shifted system
  }
  double max_diag = 0.0;
  for (double d : A.diagonal()) max_diag = std::max(max_diag, std::abs(d));
  const double mu = 1e-10 * (max_diag > 0.0 ? max_diag : 1.0);
  regularized = true;
  LinearSolveResult res = solve_linear(shifted(A, mu), b, opts);
  if (!res.report.converged || !finite(res.x)) {
    std::ostringstream os;
    os << "linear solve failed (" << describe(opts)
       << ", relative residual " << res.report.relative_residual << " after "
       << res.report.iterations << " iterations)";
    throw SolverError(os.str(), SolveReport{});
  }
  return res;
}

}  // namespace

NewtonStepResult newton_step(const NewtonSystem& system, const ScalarField& u,
                             const LabelSet& labels, const LinearSolverOptions& linear,
                             double step_scale) {
  const double p = system.p;
  std::vector<double> residual = system.gradient(labels.impose(u));
  for (double& r : residual) r = -r;
  NewtonStepResult out;
  LinearSolveResult res = robust_solve(system.L, residual, linear, out.regularized);
  out.linear = std::move(res.report);
  out.u = labels.impose(u);
  const double scale = step_scale / (p - 1.0);
  for (std::size_t r = 0; r < system.unlabeled.size(); ++r) {
    out.u[system.unlabeled[r]] += scale * res.x[r];
  }
  return out;
}

HomotopySchedule HomotopySchedule::standard(double p_target) {
  if (!(p_target > 2.0) || !std::isfinite(p_target)) {
    throw std::invalid_argument("homotopy: target p must be finite and > 2");
  }
  static const double kBase[] = {3, 4, 6, 8, 10, 15, 20, 25, 30, 40, 50};
  HomotopySchedule s;
  for (double q : kBase) {
    if (q < p_target) s.ladder.push_back(q);
  }
  if (p_target > 50.0) {
    for (double q = 50.0 * 1.25; q < p_target; q *= 1.25) s.ladder.push_back(q);
  }
  s.ladder.push_back(p_target);
  return s;
}

void HomotopySchedule::validate(double p_target) const {
  if (ladder.empty()) throw std::invalid_argument("homotopy: empty ladder");
  if (ladder.front() < 3.0) throw std::invalid_argument("homotopy: ladder must start at p >= 3");
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (!(ladder[i] > ladder[i - 1])) {
      throw std::invalid_argument("homotopy: ladder must be strictly increasing");
    }
  }
  if (ladder.back() != p_target) {
    throw std::invalid_argument("homotopy: ladder must end at the target p");
  }
  if (stage_tol && !(*stage_tol > 0.0)) {
    throw std::invalid_argument("homotopy: stage tolerance must be positive");
  }
}

SolveResult solve_laplace(const WeightedGraph& graph, const LabelSet& labels,
                          const SolverConfig& cfg) {
  check_problem(graph, labels);
  const Stopwatch clock;
  SolveResult out;
  out.report.method = "laplace";
  out.report.p = 2.0;
  out.report.seed = cfg.seed;
  out.report.linear_solver = describe(cfg.linear);
  out.report.residual_dim = cfg.dim;

  ScalarField u = labels.impose(ScalarField(graph.size(), 0.0));
  const NewtonSystem sys = assemble_newton_system(graph, u, labels, 2.0);
  NewtonStepResult step;
  try {
    step = newton_step(sys, u, labels, cfg.linear);
  } catch (const SolverError& e) {
    out.report.wall_time_ms = clock.elapsed_ms();
    throw SolverError(e.what(), out.report);
  }
  if (step.regularized) out.report.warnings.push_back("p=2: regularized linear solve");
  out.u = std::move(step.u);
  const double res = variational_scaled_residual(graph, out.u, labels, 2.0, cfg.dim);
  out.report.stages.push_back({2.0, 1, {res}});
  out.report.final_residual = res;
  out.report.converged = true;
  out.report.wall_time_ms = clock.elapsed_ms();
  return out;
}

SolveResult solve_variational(const WeightedGraph& graph, const LabelSet& labels,
                              double p_target,
                              const std::optional<HomotopySchedule>& schedule,
                              const SolverConfig& cfg) {
  if (!(p_target >= 2.0) || !std::isfinite(p_target)) {
    throw std::invalid_argument("variational solver: p must be finite and >= 2");
  }
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("variational solver: tol must be > 0");
  if (schedule) schedule->validate(p_target);
  const Stopwatch clock;

  SolveResult out = solve_laplace(graph, labels, cfg);
  SolveReport& rep = out.report;
  rep.method = schedule ? "newton_homotopy" : "newton";
  rep.p = p_target;
  if (p_target == 2.0) {
    rep.wall_time_ms = clock.elapsed_ms();
    return out;
  }
  rep.converged = false;  // the warm start's flag

  const std::vector<double> ladder = schedule ? schedule->ladder : std::vector<double>{p_target};
  ScalarField u = std::move(out.u);
  for (std::size_t s = 0; s < ladder.size(); ++s) {
    const double p = ladder[s];
    const bool last = s + 1 == ladder.size();
    const double tol = (!last && schedule && schedule->stage_tol) ? *schedule->stage_tol : cfg.tol;
    StageReport stage{p, 0, {}};
    double res = variational_scaled_residual(graph, u, labels, p, cfg.dim);
    while (!(res <= tol)) {
      if (stage.iterations >= cfg.max_outer) {
        rep.stages.push_back(stage);
        rep.final_residual = res;
        rep.wall_time_ms = clock.elapsed_ms();
        std::ostringstream os;
        os << "Newton did not reach tol " << tol << " at p=" << p << " within "
           << cfg.max_outer << " iterations (residual " << res << ")";
        throw SolverError(os.str(), rep);
      }
      const NewtonSystem sys = assemble_newton_system(graph, u, labels, p);
      ScalarField next;
      double next_res = 0.0;
      try {
        NewtonStepResult step = newton_step(sys, u, labels, cfg.linear);
        if (step.regularized) {
          rep.warnings.push_back("p=" + std::to_string(p) + ": regularized linear solve");
        }
        next = std::move(step.u);
        next_res = variational_scaled_residual(graph, next, labels, p, cfg.dim);
      } catch (const SolverError&) {
        next.clear();
      } catch (const std::invalid_argument&) {
        next.clear();  // non-finite iterate
      }
      if (next.empty() || !std::isfinite(next_res)) {
        try {
          NewtonStepResult step = newton_step(sys, u, labels, cfg.linear, 0.5);
          next = std::move(step.u);
          next_res = variational_scaled_residual(graph, next, labels, p, cfg.dim);
          rep.warnings.push_back("p=" + std::to_string(p) + ": halved Newton step");
        } catch (const std::exception& e) {
          rep.stages.push_back(stage);
          rep.final_residual = res;
          rep.wall_time_ms = clock.elapsed_ms();
          throw SolverError(std::string("Newton step failed: ") + e.what(), rep);
        }
      }
      u = std::move(next);
      res = next_res;
      ++stage.iterations;
      stage.residuals.push_back(res);
    }
    rep.stages.push_back(stage);
    rep.final_residual = res;
  }
  rep.converged = true;
  rep.wall_time_ms = clock.elapsed_ms();
  out.u = std::move(u);
  return out;
}

}  // namespace plap
