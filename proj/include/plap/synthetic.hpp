#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "plap/operators.hpp"
#include "plap/point_cloud.hpp"

namespace plap {

/// n i.i.d. uniform points in [0, 1]^d.
PointCloud uniform_cube(std::size_t n, std::size_t d, std::uint64_t seed);

/// Synthetic benchmark: uniform points in [0, 1]^d, the first m of which carry
/// i.i.d. uniform labels in [0, 1].
struct SyntheticProblem {
  PointCloud points;
  LabelSet labels;
};

SyntheticProblem problem_s(std::size_t n, std::size_t d, std::size_t m, std::uint64_t seed);

/// Two isotropic Gaussian classes in R^d with unit variance, means at
/// -separation/2 e_1 and +separation/2 e_1, n/2 points each (class of point i is
/// i % 2).
struct LabeledCloud {
  PointCloud points;
  std::vector<int> classes;
  int num_classes = 0;
};

LabeledCloud two_gaussians(std::size_t n, std::size_t d, double separation,
                           std::uint64_t seed);

}  // namespace plap
