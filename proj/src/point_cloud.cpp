#include "plap/point_cloud.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace plap {

PointCloud::PointCloud(std::size_t n, std::size_t d, std::vector<double> coords)
    : n_(n), d_(d), coords_(std::move(coords)) {
  if (n == 0 || d == 0) {
    throw std::invalid_argument("PointCloud: n and d must be positive");
  }
  if (coords_.size() != n * d) {
    throw std::invalid_argument("PointCloud: expected " + std::to_string(n * d) +
                                " coordinates, got " +
                                std::to_string(coords_.size()));
  }
  for (double v : coords_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("PointCloud: non-finite coordinate");
    }
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

double PointCloud::squared_distance(std::size_t i, std::size_t j) const {
  return plap::squared_distance(point(i), point(j));
}

double PointCloud::distance(std::size_t i, std::size_t j) const {
  return std::sqrt(squared_distance(i, j));
}

}  // namespace plap
