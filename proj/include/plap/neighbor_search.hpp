#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "plap/point_cloud.hpp"

namespace plap {

struct Neighbor {
  std::size_t index;
  double dist2;  // squared Euclidean distance
};

/// Orders neighbors by distance, lowest vertex index first on ties.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

/// Exact neighbor queries over the vertices of a point cloud.
///
/// Brute force is used up to `brute_force_limit` points, an axis-aligned
/// median-split tree above that. Both paths return identical results: a vertex
/// is never its own neighbor and distance ties go to the lowest index.
class NeighborSearch {
 public:
  static constexpr std::size_t kDefaultBruteForceLimit = 50000;

  explicit NeighborSearch(const PointCloud& points,
                          std::size_t brute_force_limit = kDefaultBruteForceLimit);
  ~NeighborSearch();
  NeighborSearch(NeighborSearch&&) noexcept;
  NeighborSearch& operator=(NeighborSearch&&) noexcept;

  /// The k nearest vertices to vertex i, sorted by (distance, index).
  std::vector<Neighbor> knn(std::size_t i, std::size_t k) const;

  /// Every vertex j != i with |x_i - x_j|^2 <= radius2, sorted by index.
  std::vector<Neighbor> within(std::size_t i, double radius2) const;

  bool uses_tree() const { return tree_ != nullptr; }
  const PointCloud& points() const { return *points_; }

 private:
  struct Tree;
  const PointCloud* points_;
  std::unique_ptr<Tree> tree_;
};

}  // namespace plap
