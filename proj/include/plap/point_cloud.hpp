#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace plap {

/// n points in R^d stored row-major.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(std::size_t n, std::size_t d, std::vector<double> coords);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  bool empty() const { return n_ == 0; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * d_, d_};
  }
  const std::vector<double>& coords() const { return coords_; }

  double squared_distance(std::size_t i, std::size_t j) const;
  double distance(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> coords_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace plap
