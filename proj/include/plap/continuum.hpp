#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plap/graph.hpp"
#include "plap/kernel.hpp"
#include "plap/operators.hpp"
#include "plap/point_cloud.hpp"

namespace plap {

enum class Family { eps_ball, knn_nonsym, knn_sym };
enum class Variant { unnormalized, random_walk, infinity, game_p, knn_unnormalized };

std::string to_string(Family f);
std::string to_string(Variant v);
Family family_from_string(const std::string& name);
Variant variant_from_string(const std::string& name);

/// Density and test function on [0, 1]^d with analytic derivatives.
struct ContinuumProblem {
  using Scalar = std::function<double(std::span<const double>)>;
  using Vector = std::function<std::vector<double>(std::span<const double>)>;

  std::string name;
  std::size_t dim = 0;
  Scalar rho;
  Vector grad_log_rho;
  Scalar u;
  Vector grad_u;
  Vector hess_u;  // d x d row-major
  double rho_min = 1.0;
  double rho_max = 1.0;

  /// beta with beta <= rho <= 1/beta.
  double beta() const { return std::min(rho_min, 1.0 / rho_max); }

  /// "uniform-linear": rho = 1, u = sum_i x_i / i.
  /// "uniform-quadratic": rho = 1, u = |x|^2 / 2.
  /// "drift-exp": rho = e^{x_1}/(e - 1), u = x_1.
  static ContinuumProblem preset(const std::string& name, std::size_t d);
};

/// Midpoint-rule integral of rho over [0, 1]^d on a grid of `per_axis`^d cells.
double integrate_density(const ContinuumProblem& problem, std::size_t per_axis);

/// n i.i.d. samples by rejection against the uniform envelope rho_max.
/// Throws std::runtime_error if the acceptance rate falls below 1%.
PointCloud sample_density(const ContinuumProblem& problem, std::size_t n, std::uint64_t seed);

/// u evaluated at every point.
ScalarField evaluate_u(const ContinuumProblem& problem, const PointCloud& points);

/// Normalized graph operator at the vertices in `subset` (all when empty);
/// other entries are NaN.
///
/// scale is eps for eps_ball and k for the k-NN families. Prefactors:
/// unnormalized 2/(sigma_eta n eps^{d+2}); random walk 2 m/(sigma_eta eps^2 deg);
/// infinity 1/(r0^2 eta(r0) eps^2); k-NN families replace eps^{-2} by
/// (n alpha(d)/k)^{2/d}; knn_unnormalized (symmetric graph only) uses
/// 2/(sigma_eta n) (n alpha(d)/k)^{1+2/d}. m is the kernel mass, so every
/// operator is unchanged when the kernel is multiplied by a constant.
/// Throws std::domain_error naming a vertex with an empty neighborhood.
ScalarField discrete_operator(const PointCloud& points, const ScalarField& u, Family family,
                              Variant variant, double scale, const PExponent& p,
                              const Kernel& kernel,
                              const std::vector<std::size_t>& subset = {},
                              std::size_t brute_force_limit = 4096);

/// The eps-ball operator at one vertex with its own radius eps.
double eps_operator_at(const PointCloud& points, const NeighborSearch& search,
                       const ScalarField& u, std::size_t i, double eps, Variant variant,
                       const PExponent& p, const Kernel& kernel);

/// Analytic limit of the discrete operator at x, or NaN where it is undefined
/// (|grad u| < 1e-8 with an infinity part).
///
/// eps_ball: unnormalized rho^{-1} div(rho^2 grad u), random walk
/// Delta u + 2 grad log rho . grad u, infinity Delta_inf u, game (1/p) rw +
/// (1 - 2/p) inf. knn_nonsym: the same times rho^{-2/d}. knn_sym: random walk
/// and knn_unnormalized rho^{-2/d}(Delta u + (1 - 2/d) grad log rho . grad u),
/// infinity rho^{-2/d}(Delta_inf u - (1/d) grad log rho . grad u).
double continuum_operator(const ContinuumProblem& problem, std::span<const double> x,
                          const PExponent& p, Family family,
                          Variant variant = Variant::game_p);

/// Default scale rules: eps(n) = eps_const (log n / n)^{1/(d+4)} and
/// k(n) = ceil(k_const 2^d log^2 n). With k_power > 0 the k-NN rule is
/// k(n) = ceil(k_const n^{k_power}) instead; the polylog rule keeps
/// delta_n / eps_k^2 growing with n, so the infinity part does not converge.
struct ScaleRule {
  double eps_const = 2.0;
  double k_const = 1.0;
  double k_power = 0.0;
  double eps(std::size_t n, std::size_t d) const;
  std::size_t k(std::size_t n, std::size_t d) const;
};

/// Boundary margin: eps for eps_ball, 3 (k/(n alpha(d) beta))^{1/d} for k-NN.
double boundary_margin(Family family, double scale, std::size_t n, std::size_t d,
                       double beta);

/// Vertices with dist(x, boundary of [0,1]^d) > margin.
std::vector<std::size_t> interior_vertices(const PointCloud& points, double margin);

struct ConsistencyRecord {
  Family family = Family::eps_ball;
  Variant variant = Variant::game_p;
  std::string p;
  std::size_t n = 0;
  double scale = 0.0;
  std::uint64_t seed = 0;
  std::size_t interior_count = 0;
  double err_median = 0.0;
  double err_max = 0.0;
  double target_median = 0.0;
  double discrete_median = 0.0;
};

/// For every (n, seed): sample, evaluate discrete and continuum operators at
/// interior vertices, summarize absolute errors.
std::vector<ConsistencyRecord> consistency_experiment(
    const ContinuumProblem& problem, Family family, Variant variant, const PExponent& p,
    const std::vector<std::size_t>& n_list, const std::vector<std::uint64_t>& seeds,
    const ScaleRule& rule, const Kernel& kernel);

/// family,variant,p,n,scale,seed,interior_count,err_median,err_max,target_median
void write_consistency_csv(std::ostream& os, const std::vector<ConsistencyRecord>& rows);

/// Symmetric k-NN infinity-Laplacian against its drift target, and the
/// eps-ball infinity-Laplacian at the matched scale eps = median eps_k.
/// eps_three_times_smaller compares signed medians; eps_abs_median and
/// knn_abs_median (medians of |value|) are reported alongside.
struct DriftRecord {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  double eps = 0.0;
  std::size_t interior_count = 0;
  double knn_median = 0.0;
  double target_median = 0.0;
  double eps_median = 0.0;
  double eps_abs_median = 0.0;
  double knn_abs_median = 0.0;
  bool within_30_percent = false;
  bool eps_three_times_smaller = false;
};

DriftRecord drift_experiment(const ContinuumProblem& problem, std::size_t n,
                             std::uint64_t seed, const ScaleRule& rule, const Kernel& kernel);

double median(std::vector<double> v);

}  // namespace plap
