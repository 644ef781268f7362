#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "plap/graph.hpp"

namespace plap {

using ScalarField = std::vector<double>;

/// Exponent p in [2, inf] (infinity is a distinguished value) and the
/// game-theoretic weight lambda > 0.
class PExponent {
 public:
  explicit PExponent(double p, double lambda = 1.0);
  static PExponent infinity(double lambda = 1.0);

  bool is_infinite() const { return infinite_; }
  /// Finite value; +inf for the infinite exponent.
  double value() const;
  double lambda() const { return lambda_; }
  /// 1/p, 0 for p = inf.
  double inv() const { return infinite_ ? 0.0 : 1.0 / p_; }
  /// "3", "9.5" or "inf".
  std::string str() const;

  /// Parses a number or "inf"/"infinity".
  static PExponent parse(const std::string& text, double lambda = 1.0);

 private:
  double p_ = 2.0;
  double lambda_ = 1.0;
  bool infinite_ = false;
};

/// Labeled vertices with values g and an optional source field f.
struct LabelSet {
  std::vector<std::size_t> indices;  // sorted, unique
  std::vector<double> values;        // g at indices[i]
  std::vector<double> source;        // empty or length n

  LabelSet() = default;
  /// Sorts by index; throws std::invalid_argument on duplicates, size
  /// mismatch or non-finite values.
  LabelSet(std::vector<std::size_t> idx, std::vector<double> vals,
           std::vector<double> f = {});

  std::size_t size() const { return indices.size(); }
  bool has_source() const;
  double f(std::size_t vertex) const { return source.empty() ? 0.0 : source[vertex]; }

  /// Throws unless every index is < n, the source has length 0 or n, and
  /// (when `require_nonempty`) at least one vertex is labeled.
  void validate(std::size_t n, bool require_nonempty = true) const;

  std::vector<char> mask(std::size_t n) const;
  std::vector<std::size_t> unlabeled(std::size_t n) const;
  /// Copy of u with g written on the labeled vertices.
  ScalarField impose(ScalarField u) const;
  double min_value() const;
  double max_value() const;
};

/// Range of y in the min/max of the graph infinity-Laplacian.
enum class InfinityRange {
  neighbors,     // positive-weight neighbors only (default)
  all_vertices,  // every y: non-edges contribute 0, clamping min <= 0 <= max
};

/// J_p(u) = (1/2p) sum_{x,y} w_xy |u(x)-u(y)|^p + sum_x f(x) u(x); for p = inf
/// the maximum of w_xy |u(x)-u(y)|.
double energy_Jp(const WeightedGraph& graph, const ScalarField& u, const LabelSet& labels,
                 const PExponent& p);

/// sum_y w_xy |u(x)-u(y)|^{p-2} (u(y)-u(x)) at every vertex.
ScalarField variational_residual(const WeightedGraph& graph, const ScalarField& u,
                                 double p);

/// sum_y w_xy (u(y)-u(x)).
ScalarField graph_laplacian_2(const WeightedGraph& graph, const ScalarField& u);

/// min_y w_xy (u(y)-u(x)) + max_y w_xy (u(y)-u(x)).
ScalarField graph_infinity(const WeightedGraph& graph, const ScalarField& u,
                           InfinityRange range = InfinityRange::neighbors);

/// (1/(d_x p)) Delta_2 u + lambda (1 - 2/p) Delta_inf u.
ScalarField game_operator(const WeightedGraph& graph, const ScalarField& u,
                          const PExponent& p,
                          InfinityRange range = InfinityRange::neighbors);

/// Residual scalings used as stopping criteria.
///
/// Variational: max over unlabeled x of |Delta_p u(x) - f(x)| / (n sigma^{d+p-1}).
/// Game: max over unlabeled x of |L_p u(x) + f(x)| / sigma.
/// A graph without a length scale (sigma = 0) uses sigma = 1.
double variational_scaled_residual(const WeightedGraph& graph, const ScalarField& u,
                                   const LabelSet& labels, double p, std::size_t dim);
double game_scaled_residual(const WeightedGraph& graph, const ScalarField& u,
                            const LabelSet& labels, const PExponent& p,
                            InfinityRange range = InfinityRange::neighbors);

/// sigma, or 1 if the graph has none.
double residual_length_scale(const WeightedGraph& graph);

/// Checks u has one finite entry per vertex.
void check_field(const WeightedGraph& graph, const ScalarField& u);

}  // namespace plap
