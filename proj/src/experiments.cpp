#include "plap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "plap/continuum.hpp"
#include "plap/graph.hpp"
#include "plap/report.hpp"
#include "plap/synthetic.hpp"

#ifndef PLAP_VERSION
#define PLAP_VERSION "0.0.0"
#endif

namespace plap {

const char* version() { return PLAP_VERSION; }

std::vector<AccuracyRow> two_gaussian_sweep(const TwoGaussianSweep& sweep,
                                            const ScoreCallback& on_result) {
  if (sweep.n_list.empty() || sweep.p_list.empty() || sweep.labels_per_class.empty()) {
    throw std::invalid_argument("two_gaussian_sweep: empty n, p or label list");
  }
  const std::size_t n_max = *std::max_element(sweep.n_list.begin(), sweep.n_list.end());
  const std::size_t n_min = *std::min_element(sweep.n_list.begin(), sweep.n_list.end());
  const std::size_t pool = std::min(sweep.label_pool, n_min);
  std::vector<AccuracyRow> rows;
  for (std::size_t s = 0; s < sweep.seeds; ++s) {
    const std::uint64_t seed = sweep.seed + s;
    const LabeledCloud full = two_gaussians(n_max, sweep.d, sweep.separation, seed);
    for (std::size_t per_class : sweep.labels_per_class) {
      const std::vector<int> head(full.classes.begin(),
                                  full.classes.begin() + static_cast<std::ptrdiff_t>(pool));
      const MulticlassLabels labels =
          sample_labels(head, full.num_classes, per_class, seed * 7919 + per_class);
      std::vector<char> labeled(n_max, 0);
      for (std::size_t i : labels.indices) labeled[i] = 1;
      for (std::size_t n : sweep.n_list) {
        const PointCloud pts(n, sweep.d,
                             std::vector<double>(full.points.coords().begin(),
                                                 full.points.coords().begin() +
                                                     static_cast<std::ptrdiff_t>(n * sweep.d)));
        const std::vector<int> truth(full.classes.begin(),
                                     full.classes.begin() + static_cast<std::ptrdiff_t>(n));
        const WeightedGraph graph = knn_graph(pts, sweep.K);
        if (!is_connected(graph)) {
          throw std::invalid_argument("two_gaussian_sweep: graph disconnected at n = " +
                                      std::to_string(n) + "; increase K");
        }
        std::vector<std::size_t> mask;
        for (std::size_t i = 0; i < n; ++i) {
          if (!labeled[i]) mask.push_back(i);
        }
        for (const PExponent& p : sweep.p_list) {
          ClassifyConfig cfg = sweep.base;
          cfg.p = p;
          cfg.variational.dim = sweep.d;
          if (!p.is_infinite() && p.value() == 2.0) cfg.method = SolverMethod::laplace;
          const ScoreMatrix scores = one_vs_rest(graph, labels, cfg);
          rows.push_back({p.str(), to_string(cfg.method), per_class, n, seed,
                          accuracy(scores, truth, mask)});
          if (on_result) on_result(rows.back(), scores);
        }
      }
    }
  }
  return rows;
}

void write_accuracy_csv(std::ostream& os, const std::vector<AccuracyRow>& rows) {
  const auto old = os.precision(17);
  os << "p,method,labels_per_class,n,seed,accuracy\n";
  for (const auto& r : rows) {
    os << r.p << ',' << r.method << ',' << r.labels_per_class << ',' << r.n << ',' << r.seed
       << ',' << r.accuracy << '\n';
  }
  os.precision(old);
}

double median_accuracy(const std::vector<AccuracyRow>& rows, const std::string& p,
                       std::size_t labels_per_class, std::size_t n) {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.p == p && r.labels_per_class == labels_per_class && r.n == n) {
      v.push_back(r.accuracy);
    }
  }
  return median(std::move(v));
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile: q outside [0, 1]");
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[rank == 0 ? 0 : rank - 1];
}

SpikeResult spike_experiment(std::size_t n, std::size_t K, std::uint64_t seed,
                             const GameConfig& game) {
  const PointCloud cube = uniform_cube(n, 2, seed);
  std::vector<double> coords = cube.coords();
  coords.insert(coords.end(), {0.25, 0.5, 0.75, 0.5});
  const PointCloud pts(n + 2, 2, std::move(coords));
  const WeightedGraph graph = knn_graph(pts, K);
  const LabelSet labels({n, n + 1}, {0.0, 1.0});

  SpikeResult out;
  SolverConfig lap;
  lap.dim = 2;
  lap.linear = game.linear;
  lap.linear.method = LinearMethod::cg;
  out.u_p2 = solve_laplace(graph, labels, lap).u;

  GameConfig inf = game;
  inf.p = PExponent::infinity();
  SolveResult res = gradient_descent_solve(graph, labels, inf);
  out.iterations_inf = res.report.total_iterations();
  out.converged_inf = res.report.converged;
  out.u_inf = std::move(res.u);

  auto spread = [](const ScalarField& u) { return percentile(u, 0.95) - percentile(u, 0.05); };
  out.spread_p2 = spread(out.u_p2);
  out.spread_inf = spread(out.u_inf);
  return out;
}

std::vector<BenchRow> bench(const BenchSpec& spec) {
  std::vector<BenchRow> rows;
  for (std::size_t d : spec.d_list) {
    for (std::size_t n : spec.n_list) {
      for (std::size_t t = 0; t < spec.trials; ++t) {
        const std::uint64_t seed = spec.seed + t;
        const SyntheticProblem prob = problem_s(n, d, std::min(spec.m, n), seed);
        const WeightedGraph graph = knn_graph(prob.points, std::min(spec.K, n - 1));
        for (SolverMethod m : spec.methods) {
          ClassifyConfig cfg = spec.base;
          cfg.method = m;
          cfg.p = spec.p;
          cfg.variational.dim = d;
          cfg.variational.tol = spec.tol;
          cfg.game.tol = spec.tol;
          if (m == SolverMethod::newton_like) cfg.game.linear.method = LinearMethod::gmres;
          BenchRow row{to_string(m), n, d, t, 0.0, 0, false};
          Stopwatch sw;
          try {
            const SolveResult res = solve_binary(graph, prob.labels, cfg);
            row.iterations = res.report.total_iterations();
            row.converged = res.report.converged;
          } catch (const SolverError& e) {
            row.iterations = e.report().total_iterations();
          }
          row.wall_ms = sw.elapsed_ms();
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  const auto old = os.precision(10);
  os << "method,n,d,trial,wall_ms,iterations,converged\n";
  for (const auto& r : rows) {
    os << r.method << ',' << r.n << ',' << r.d << ',' << r.trial << ',' << r.wall_ms << ','
       << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
  os.precision(old);
}

}  // namespace plap
