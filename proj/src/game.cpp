#include "plap/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace plap {

std::string to_string(ThetaPolicy policy) {
  return policy == ThetaPolicy::minimal ? "minimal" : "constant";
}

ThetaPolicy theta_policy_from_string(const std::string& name) {
  if (name == "minimal" || name == "default") return ThetaPolicy::minimal;
  if (name == "constant") return ThetaPolicy::constant;
  throw std::invalid_argument("unknown theta policy '" + name + "'");
}

double max_alpha(const PExponent& p, double eps_reg) {
  if (!(eps_reg >= 0.0)) throw std::invalid_argument("eps_reg must be >= 0");
  if (p.is_infinite()) return 1.0 / (2.0 + eps_reg);
  const double pv = p.value();
  return pv / ((2.0 + eps_reg) * pv - 3.0);
}

WeightedGraph normalize_weights(const WeightedGraph& graph, double& factor) {
  const double m = graph.max_weight();
  if (m > 1.0) {
    factor = 1.0 / m;
    return graph.scaled(factor);
  }
  factor = 1.0;
  return graph;
}

namespace {

// out(x) = L_p u(x) for every vertex, fused for the inner loops.
void apply_game(const WeightedGraph& graph, const ScalarField& u, const PExponent& p,
                InfinityRange range, ScalarField& out) {
  const std::size_t n = graph.size();
  const double ip = p.inv();
  const double c_inf = p.lambda() * (1.0 - 2.0 * ip);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    double lap = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      const double v = ws[t] * (u[cols[t]] - u[i]);
      lap += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (cols.empty()) {
      throw std::domain_error("vertex " + std::to_string(i) + " has no neighbors");
    }
    if (range == InfinityRange::all_vertices && cols.size() + 1 < n) {
      lo = std::min(lo, 0.0);
      hi = std::max(hi, 0.0);
    }
    out[i] = ip * lap / graph.degree(i) + c_inf * (lo + hi);
  }
}

void check_alpha(double alpha, const PExponent& p, double eps_reg) {
  const double bound = max_alpha(p, eps_reg);
  if (!(alpha > 0.0) || alpha > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step size alpha=" << alpha << " violates 0 < alpha <= " << bound;
    throw std::invalid_argument(os.str());
  }
}

SolveReport game_report(const char* method, const GameConfig& cfg) {
  SolveReport rep;
  rep.method = method;
  rep.p = cfg.p.value();
  rep.seed = cfg.seed;
  rep.game_fields = true;
  return rep;
}

WeightedGraph prepare(const WeightedGraph& graph, const LabelSet& labels, SolveReport& rep) {
  check_problem(graph, labels);
  double factor = 1.0;
  WeightedGraph g = normalize_weights(graph, factor);
  if (factor != 1.0) {
    rep.weight_normalization = factor;
    rep.warnings.push_back("weights divided by their maximum to satisfy w <= 1");
  }
  return g;
}

SolverConfig laplace_config(const GameConfig& cfg) {
  SolverConfig c;
  c.linear = cfg.linear;
  c.linear.method = LinearMethod::cg;
  if (c.linear.preconditioner == PreconditionerKind::incomplete_lu) {
    c.linear.preconditioner = PreconditionerKind::incomplete_cholesky;
  }
  c.seed = cfg.seed;
  return c;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

ScalarField gradient_step(const WeightedGraph& graph, const ScalarField& u,
                          const LabelSet& labels, const PExponent& p, double alpha,
                          double eps_reg, InfinityRange range) {
  check_field(graph, u);
  labels.validate(graph.size(), false);
  ScalarField Lu(graph.size());
  apply_game(graph, u, p, range, Lu);
  ScalarField out(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    out[i] = u[i] + alpha * (Lu[i] - eps_reg * u[i] + labels.f(i));
  }
  return labels.impose(std::move(out));
}

SolveResult gradient_descent_solve(const WeightedGraph& graph_in, const LabelSet& labels,
                                   const GameConfig& cfg) {
  const Stopwatch clock;
  SolveReport rep = game_report("gradient_descent", cfg);
  const WeightedGraph graph = prepare(graph_in, labels, rep);
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("gradient descent: tol must be > 0");
  const double eps = cfg.eps_reg;
  if (!(eps >= 0.0)) throw std::invalid_argument("gradient descent: eps_reg must be >= 0");
  const double alpha = cfg.alpha ? *cfg.alpha : max_alpha(cfg.p, eps);
  check_alpha(alpha, cfg.p, eps);
  rep.alpha = alpha;
  if (eps > 0.0) rep.eps_reg = eps;
  rep.linear_solver = "none";

  const std::size_t n = graph.size();
  const PExponent& p = cfg.p;
  const auto mask = labels.mask(n);
  const double gmin = labels.min_value();
  const double gmax = labels.max_value();
  const double sigma = residual_length_scale(graph);
  StageReport stage{p.value(), 0, {}};
  ScalarField Lu(n);
  SolveResult out;

  auto step = [&](ScalarField& u, double e) {
    apply_game(graph, u, p, cfg.range, Lu);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) continue;
      const double v = Lu[i] - e * u[i] + labels.f(i);
      r = std::max(r, std::abs(v));
      u[i] += alpha * v;
    }
    return r;
  };
  auto fail = [&](const std::string& why) {
    rep.stages.push_back(stage);
    rep.wall_time_ms = clock.elapsed_ms();
    throw SolverError(why, rep);
  };

  if (eps > 0.0) {
    if (labels.has_source()) {
      throw std::invalid_argument("regularized gradient descent requires f = 0");
    }
    ScalarField u = labels.impose(ScalarField(n, gmax));
    const double gap = std::max(0.0, gmax) - std::min(0.0, gmin);
    const double rate = 1.0 - alpha * eps;
    double bound = gap;
    while (bound > cfg.tol) {
      if (stage.iterations >= cfg.max_iter) fail("regularized iteration hit max_iter");
      const double r = step(u, eps);
      ++stage.iterations;
      stage.residuals.push_back(r / sigma);
      bound *= rate;
    }
    rep.final_residual = game_scaled_residual(graph, u, labels, p, cfg.range);
    out.u = std::move(u);
  } else if (labels.has_source()) {
    rep.bracket_fallback = true;
    rep.warnings.push_back("nonzero source: plain iteration stopped on the residual");
    double mean = 0.0;
    for (double v : labels.values) mean += v;
    mean /= static_cast<double>(labels.size());
    ScalarField u = labels.impose(ScalarField(n, mean));
    while (true) {
      if (stage.iterations >= cfg.max_iter) fail("gradient descent hit max_iter");
      ScalarField prev = u;
      const double r = step(u, 0.0) / sigma;
      if (r <= cfg.tol) {
        u = std::move(prev);
        rep.final_residual = r;
        break;
      }
      ++stage.iterations;
      stage.residuals.push_back(r);
    }
    out.u = std::move(u);
  } else {
    ScalarField upper = labels.impose(ScalarField(n, gmax));
    ScalarField lower = labels.impose(ScalarField(n, gmin));
    double width = sup_diff(upper, lower);
    rep.bracket_width_history.push_back(width);
    while (width > 2.0 * cfg.tol) {
      if (stage.iterations >= cfg.max_iter) fail("bracket iteration hit max_iter");
      step(upper, 0.0);
      step(lower, 0.0);
      width = sup_diff(upper, lower);
      ++stage.iterations;
      stage.residuals.push_back(width);
      rep.bracket_width_history.push_back(width);
    }
    out.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.u[i] = 0.5 * (upper[i] + lower[i]);
    out.u = labels.impose(std::move(out.u));
    rep.final_residual = game_scaled_residual(graph, out.u, labels, p, cfg.range);
  }
  rep.stages.push_back(stage);
  rep.converged = true;
  rep.wall_time_ms = clock.elapsed_ms();
  out.report = std::move(rep);
  return out;
}

NewtonLikeSystem assemble_newton_like(const WeightedGraph& graph, const ScalarField& u,
                                      const LabelSet& labels, const PExponent& p) {
  check_field(graph, u);
  labels.validate(graph.size(), true);
  if (p.is_infinite()) {
    throw std::invalid_argument(
        "Newton-like method needs finite p; use gradient descent or semi-implicit for "
        "p = inf");
  }
  const std::size_t n = graph.size();
  const double pv = p.value();
  const ScalarField full = labels.impose(u);
  NewtonLikeSystem sys;
  sys.unlabeled = labels.unlabeled(n);
  std::vector<std::size_t> row_of(n, NewtonSystem::npos);
  for (std::size_t r = 0; r < sys.unlabeled.size(); ++r) row_of[sys.unlabeled[r]] = r;
  const std::size_t m = sys.unlabeled.size();
  sys.y_plus.assign(m, NewtonSystem::npos);
  sys.y_minus.assign(m, NewtonSystem::npos);
  sys.beta.resize(m);
  sys.rhs.assign(m, 0.0);
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(graph.nnz() + m);

  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = sys.unlabeled[r];
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    const double d = graph.degree(i);
    if (cols.empty() || !(d > 0.0)) {
      throw std::domain_error("vertex " + std::to_string(i) + " has no neighbors");
    }
    std::size_t tp = 0;
    std::size_t tm = 0;
    double vp = -std::numeric_limits<double>::infinity();
    double vm = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < cols.size(); ++t) {
      const double v = ws[t] * (full[i] - full[cols[t]]);
      if (v > vp) {
        vp = v;
        tp = t;
      }
      if (v < vm) {
        vm = v;
        tm = t;
      }
    }
    sys.y_plus[r] = cols[tp];
    sys.y_minus[r] = cols[tm];
    const double boost = p.lambda() * d * (pv - 2.0);
    auto& beta = sys.beta[r];
    beta.resize(cols.size());
    double diag = 0.0;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      const double hits = (t == tp ? 1.0 : 0.0) + (t == tm ? 1.0 : 0.0);
      const double b = ws[t] * (1.0 + boost * hits);
      beta[t] = b;
      diag += b;
      if (row_of[cols[t]] == NewtonSystem::npos) {
        sys.rhs[r] += b * full[cols[t]];
      } else {
        trip.push_back({r, row_of[cols[t]], -b});
      }
    }
    trip.push_back({r, r, diag});
    sys.rhs[r] += d * pv * labels.f(i);
  }
  sys.matrix = SparseMatrix::from_triplets(m, m, std::move(trip), false);
  return sys;
}

SolveResult newton_like_solve(const WeightedGraph& graph_in, const LabelSet& labels,
                              const GameConfig& cfg,
                              const std::optional<HomotopySchedule>& schedule) {
  if (cfg.p.is_infinite()) {
    throw std::invalid_argument(
        "Newton-like method needs finite p; use gradient descent or semi-implicit for "
        "p = inf");
  }
  const Stopwatch clock;
  SolveReport rep = game_report(schedule ? "newton_like_homotopy" : "newton_like", cfg);
  const WeightedGraph graph = prepare(graph_in, labels, rep);
  const double p_target = cfg.p.value();
  if (schedule) schedule->validate(p_target);
  LinearSolverOptions linear = cfg.linear;
  linear.method = LinearMethod::gmres;
  if (linear.preconditioner == PreconditionerKind::incomplete_cholesky) {
    linear.preconditioner = PreconditionerKind::incomplete_lu;
  }
  rep.linear_solver = describe(linear);

  SolveResult warm = solve_laplace(graph, labels, laplace_config(cfg));
  ScalarField u = std::move(warm.u);
  {
    const double r0 = game_scaled_residual(graph, u, labels, PExponent(2.0), cfg.range);
    rep.stages.push_back({2.0, 1, {r0}});
  }
  if (p_target == 2.0) {
    rep.final_residual = rep.stages.back().residuals.back();
    rep.converged = true;
    rep.wall_time_ms = clock.elapsed_ms();
    return {std::move(u), std::move(rep)};
  }

  const std::vector<double> ladder =
      schedule ? schedule->ladder : std::vector<double>{p_target};
  for (std::size_t s = 0; s < ladder.size(); ++s) {
    const PExponent p(ladder[s], cfg.p.lambda());
    const bool last = s + 1 == ladder.size();
    const double tol = (!last && schedule && schedule->stage_tol) ? *schedule->stage_tol : cfg.tol;
    StageReport stage{p.value(), 0, {}};
    double res = game_scaled_residual(graph, u, labels, p, cfg.range);
    while (!(res <= tol)) {
      if (stage.iterations >= cfg.max_iter) {
        rep.stages.push_back(stage);
        rep.final_residual = res;
        rep.wall_time_ms = clock.elapsed_ms();
        throw SolverError("Newton-like iteration did not converge at p=" + p.str(), rep);
      }
      const NewtonLikeSystem sys = assemble_newton_like(graph, u, labels, p);
      // Solve for the increment: M delta = rhs - M u.
      std::vector<double> x(sys.unlabeled.size());
      for (std::size_t r = 0; r < x.size(); ++r) x[r] = u[sys.unlabeled[r]];
      std::vector<double> b = sys.matrix.multiply(x);
      for (std::size_t r = 0; r < b.size(); ++r) b[r] = sys.rhs[r] - b[r];
      LinearSolveResult lin;
      try {
        lin = solve_linear(sys.matrix, b, linear);
      } catch (const std::exception& e) {
        rep.stages.push_back(stage);
        rep.wall_time_ms = clock.elapsed_ms();
        throw SolverError(std::string("Newton-like linear solve failed: ") + e.what(), rep);
      }
      if (!lin.report.converged) {
        rep.stages.push_back(stage);
        rep.final_residual = res;
        rep.wall_time_ms = clock.elapsed_ms();
        std::ostringstream os;
        os << "Newton-like linear solve did not converge (relative residual "
           << lin.report.relative_residual << ")";
        throw SolverError(os.str(), rep);
      }
      for (std::size_t r = 0; r < x.size(); ++r) u[sys.unlabeled[r]] += lin.x[r];
      res = game_scaled_residual(graph, u, labels, p, cfg.range);
      ++stage.iterations;
      stage.residuals.push_back(res);
    }
    rep.stages.push_back(stage);
    rep.final_residual = res;
  }
  rep.converged = true;
  rep.wall_time_ms = clock.elapsed_ms();
  return {std::move(u), std::move(rep)};
}

std::vector<double> semi_implicit_theta(const WeightedGraph& graph, const PExponent& p,
                                        ThetaPolicy policy, double theta_value) {
  const double ip = p.inv();
  std::vector<double> theta(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const double eta = 2.0 * ip + p.lambda() * graph.degree(i) * (1.0 - 2.0 * ip);
    const double lower = std::max(1.0, eta);
    if (policy == ThetaPolicy::minimal) {
      theta[i] = lower;
    } else {
      if (!(theta_value >= lower * (1.0 - 1e-12))) {
        std::ostringstream os;
        os << "theta=" << theta_value << " violates theta >= max(1, eta(x)) = " << lower
           << " at vertex " << i;
        throw std::invalid_argument(os.str());
      }
      theta[i] = theta_value;
    }
  }
  return theta;
}

SolveResult semi_implicit_solve(const WeightedGraph& graph_in, const LabelSet& labels,
                                const GameConfig& cfg) {
  const Stopwatch clock;
  SolveReport rep = game_report("semi_implicit", cfg);
  const WeightedGraph graph = prepare(graph_in, labels, rep);
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("semi-implicit: tol must be > 0");
  const PExponent& p = cfg.p;
  const std::vector<double> theta =
      semi_implicit_theta(graph, p, cfg.theta_policy, cfg.theta_value);
  rep.theta_policy = to_string(cfg.theta_policy);
  if (cfg.theta_policy == ThetaPolicy::constant) {
    rep.theta_policy += "(" + std::to_string(cfg.theta_value) + ")";
  }
  const SolverConfig lap_cfg = laplace_config(cfg);
  rep.linear_solver = describe(lap_cfg.linear);

  SolveResult warm = solve_laplace(graph, labels, lap_cfg);
  ScalarField u = std::move(warm.u);
  const std::size_t n = graph.size();
  // The system matrix does not depend on u at p = 2.
  const NewtonSystem sys = assemble_newton_system(graph, u, labels, 2.0);
  const Preconditioner M =
      Preconditioner::make(lap_cfg.linear.preconditioner, sys.L, lap_cfg.linear.drop_tol);
  for (const auto& w : M.warnings()) rep.warnings.push_back(w);

  const auto mask = labels.mask(n);
  const double sigma = residual_length_scale(graph);
  StageReport stage{p.value(), 0, {}};
  ScalarField Lu(n);
  std::vector<double> b(sys.unlabeled.size());
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  auto fail = [&](const std::string& why, double res) {
    rep.stages.push_back(stage);
    rep.final_residual = res;
    rep.wall_time_ms = clock.elapsed_ms();
    throw SolverError(why, rep);
  };

  while (true) {
    apply_game(graph, u, p, cfg.range, Lu);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) res = std::max(res, std::abs(Lu[i] + labels.f(i)));
    }
    res /= sigma;
    if (stage.iterations > 0) stage.residuals.push_back(res);
    if (res <= cfg.tol) {
      rep.final_residual = res;
      break;
    }
    if (!std::isfinite(res)) fail("semi-implicit iteration diverged (non-finite residual)", res);
    if (res < best) {
      best = res;
      since_best = 0;
    } else if (++since_best >= cfg.stall_window) {
      std::ostringstream os;
      os << "semi-implicit iteration diverged: no residual decrease in " << cfg.stall_window
         << " iterations (best " << best << ")";
      fail(os.str(), res);
    }
    if (stage.iterations >= cfg.max_iter) fail("semi-implicit iteration hit max_iter", res);
    for (std::size_t r = 0; r < b.size(); ++r) {
      const std::size_t i = sys.unlabeled[r];
      b[r] = 2.0 * graph.degree(i) / theta[i] * (Lu[i] + labels.f(i));
    }
    LinearSolveResult lin = solve_linear(sys.L, b, lap_cfg.linear, {}, &M);
    if (!lin.report.converged) {
      std::ostringstream os;
      os << "semi-implicit linear solve did not converge (relative residual "
         << lin.report.relative_residual << ")";
      fail(os.str(), res);
    }
    for (std::size_t r = 0; r < b.size(); ++r) u[sys.unlabeled[r]] += lin.x[r];
    ++stage.iterations;
  }
  rep.stages.push_back(stage);
  rep.converged = true;
  rep.wall_time_ms = clock.elapsed_ms();
  return {std::move(u), std::move(rep)};
}

}  // namespace plap
