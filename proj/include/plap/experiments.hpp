#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "plap/classify.hpp"
#include "plap/game.hpp"
#include "plap/operators.hpp"

namespace plap {

/// Version string embedded in every report.
const char* version();

/// Two-Gaussian one-vs-rest sweep. For each seed one cloud of max(n_list)
/// points is drawn; labels are sampled among its first `label_pool` points
/// and every n uses the first n points, so labels and data are nested
/// across n. p = 2 uses the Laplace solve, p > 2 uses `method`.
struct TwoGaussianSweep {
  std::size_t d = 5;
  double separation = 4.0;
  std::size_t K = 10;
  std::vector<std::size_t> n_list{512, 1024, 2048, 4096, 8192};
  std::vector<PExponent> p_list{PExponent(2.0), PExponent(9.0)};
  std::vector<std::size_t> labels_per_class{1};
  std::size_t label_pool = 512;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  ClassifyConfig base;  // method used for p > 2, tolerances, linear options
};

struct AccuracyRow;
using ScoreCallback = std::function<void(const AccuracyRow&, const ScoreMatrix&)>;

struct AccuracyRow {
  std::string p;
  std::string method;
  std::size_t labels_per_class = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

/// `on_result`, when set, sees every row with its score matrix.
std::vector<AccuracyRow> two_gaussian_sweep(const TwoGaussianSweep& sweep,
                                            const ScoreCallback& on_result = {});

/// p,method,labels_per_class,n,seed,accuracy
void write_accuracy_csv(std::ostream& os, const std::vector<AccuracyRow>& rows);

/// Median accuracy over seeds for one (p, labels_per_class, n) cell; NaN if absent.
double median_accuracy(const std::vector<AccuracyRow>& rows, const std::string& p,
                       std::size_t labels_per_class, std::size_t n);

/// n uniform points in [0,1]^2 plus labeled points (0.25, 0.5) -> 0 and
/// (0.75, 0.5) -> 1 on a K-NN graph. Compares the 5th-95th percentile spread
/// of the p = 2 solution with that of the p = inf game solution.
struct SpikeResult {
  double spread_p2 = 0.0;
  double spread_inf = 0.0;
  std::size_t iterations_inf = 0;
  bool converged_inf = false;
  ScalarField u_p2;
  ScalarField u_inf;
};

SpikeResult spike_experiment(std::size_t n, std::size_t K, std::uint64_t seed,
                             const GameConfig& game);

/// Value at the q-quantile (nearest rank on the sorted values).
double percentile(std::vector<double> v, double q);

/// Wall time of each solver on problem S.
struct BenchRow {
  std::string method;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t trial = 0;
  double wall_ms = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct BenchSpec {
  std::vector<SolverMethod> methods;
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> d_list;
  PExponent p{11.0};
  double tol = 1e-7;
  std::size_t trials = 1;
  std::size_t m = 10;
  std::size_t K = 10;
  std::uint64_t seed = 0;
  ClassifyConfig base;
};

std::vector<BenchRow> bench(const BenchSpec& spec);

/// method,n,d,trial,wall_ms,iterations,converged
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

}  // namespace plap
