#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "plap/kernel.hpp"
#include "plap/neighbor_search.hpp"
#include "plap/point_cloud.hpp"

namespace plap {

/// Sparse nonnegative adjacency in compressed rows, with cached degrees.
///
/// Symmetry is verified structurally at construction (w_xy == w_yx bit for
/// bit). Rows never contain the diagonal. Zero weights are not stored.
class WeightedGraph {
 public:
  struct Edge {
    std::size_t from;
    std::size_t to;
    double weight;
  };

  WeightedGraph() = default;

  /// Builds from directed entries; duplicate (from, to) pairs are rejected.
  /// `symmetric_hint == false` forces the asymmetric flag even when the
  /// entries happen to be symmetric.
  static WeightedGraph from_edges(std::size_t n, std::vector<Edge> edges,
                                  double sigma = 0.0, bool symmetric_hint = true);

  /// Builds from raw CSR arrays (used by the graph cache reader).
  static WeightedGraph from_csr(std::size_t n, std::vector<std::size_t> offsets,
                                std::vector<std::size_t> columns,
                                std::vector<double> weights, double sigma);

  std::size_t size() const { return n_; }
  std::size_t nnz() const { return columns_.size(); }

  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {columns_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const double> weights(std::size_t i) const {
    return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  double degree(std::size_t i) const { return degrees_[i]; }
  const std::vector<double>& degrees() const { return degrees_; }
  /// Length scale sigma; 0 when the construction does not define one.
  double sigma() const { return sigma_; }
  bool is_symmetric() const { return symmetric_; }

  /// w_ij, or 0 when (i, j) is not an edge.
  double weight(std::size_t i, std::size_t j) const;
  double max_weight() const;

  /// All weights multiplied by c > 0.
  WeightedGraph scaled(double c) const;

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<std::size_t>& columns() const { return columns_; }
  const std::vector<double>& values() const { return weights_; }

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  void finalize(bool symmetric_hint);

  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> columns_;
  std::vector<double> weights_;
  std::vector<double> degrees_;
  double sigma_ = 0.0;
  bool symmetric_ = true;
  std::vector<std::string> warnings_;
};

enum class WeightRule { gaussian, unit };
enum class KnnMode { nonsymmetric, symmetric };

/// Distances to the k-th nearest neighbor (self excluded).
struct KnnRadii {
  std::vector<double> eps_k;
  std::vector<double> eps_k_squared;
  std::size_t k = 0;
};

/// Symmetrized K-nearest-neighbor graph: x ~ y whenever either is among the
/// other's K nearest neighbors. Gaussian weights exp(-|x-y|^2 / sigma^2) use
/// sigma = max edge length / 2 over the symmetrized edge set; `unit` gives
/// weight 1 on every edge.
WeightedGraph knn_graph(const PointCloud& points, std::size_t K,
                        WeightRule rule = WeightRule::gaussian,
                        std::size_t brute_force_limit =
                            NeighborSearch::kDefaultBruteForceLimit);

/// Random geometric graph w_xy = eta(|x - y| / eps) for |x - y| <= eps.
WeightedGraph eps_graph(const PointCloud& points, double eps, const Kernel& kernel,
                        std::size_t brute_force_limit =
                            NeighborSearch::kDefaultBruteForceLimit);

KnnRadii knn_radii(const PointCloud& points, std::size_t k,
                   std::size_t brute_force_limit =
                       NeighborSearch::kDefaultBruteForceLimit);

/// Kernel k-NN graph at scale eps_k(x) (nonsymmetric, directed rows) or at
/// scale max{eps_k(x), eps_k(y)} (symmetric).
WeightedGraph knn_kernel_graph(const PointCloud& points, std::size_t k,
                               const Kernel& kernel, KnnMode mode,
                               std::size_t brute_force_limit =
                                   NeighborSearch::kDefaultBruteForceLimit);

/// Same as above with precomputed radii.
WeightedGraph knn_kernel_graph(const PointCloud& points, const KnnRadii& radii,
                               const Kernel& kernel, KnnMode mode,
                               std::size_t brute_force_limit =
                                   NeighborSearch::kDefaultBruteForceLimit);

/// True iff the positive-weight edges (taken as undirected) connect every vertex.
bool is_connected(const WeightedGraph& graph);

/// Half the longest stored edge, the length scale of knn_graph.
double edge_length_scale(const WeightedGraph& graph, const PointCloud& points);

}  // namespace plap
