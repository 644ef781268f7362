#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace plap {

struct StageReport {
  double p = 2.0;  // +inf for p = inf
  std::size_t iterations = 0;
  std::vector<double> residuals;  // scaled residual after each iteration
};

/// Iteration and residual history of one solve. Serializes to
/// {method, p, stages:[{p, iterations, residuals}], wall_time_ms, linear_solver,
/// seed} plus the game-solver fields when set.
struct SolveReport {
  std::string method;
  double p = 2.0;
  std::vector<StageReport> stages;
  double wall_time_ms = 0.0;
  std::string linear_solver;
  std::uint64_t seed = 0;
  bool converged = false;
  double final_residual = 0.0;
  std::size_t residual_dim = 0;  // d used in the variational residual scaling

  // Game solvers.
  std::optional<double> alpha;
  std::string theta_policy;
  std::vector<double> bracket_width_history;
  std::optional<double> eps_reg;
  std::optional<double> weight_normalization;  // factor applied to the weights
  bool bracket_fallback = false;
  // Game solvers always emit alpha, theta_policy, bracket_width_history and eps_reg.
  bool game_fields = false;

  std::vector<std::string> warnings;

  std::size_t total_iterations() const;
  /// Iterations over stages with p > 2 (excludes the p = 2 warm start).
  std::size_t nonlinear_iterations() const;
  std::size_t max_stage_iterations() const;

  /// `include_timing == false` drops wall_time_ms, the only field that varies
  /// between identical runs.
  nlohmann::json to_json(bool include_timing = true) const;
};

/// Raised when a solver fails to converge; carries the partial report.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// JSON number, or the string "inf"/"-inf"/"nan" for non-finite values.
nlohmann::json json_number(double v);

}  // namespace plap
