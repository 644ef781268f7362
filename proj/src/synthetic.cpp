#include "plap/synthetic.hpp"

#include <numeric>
#include <random>
#include <stdexcept>

namespace plap {

PointCloud uniform_cube(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw std::invalid_argument("uniform_cube: n and d must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> c(n * d);
  for (double& v : c) v = unif(rng);
  return PointCloud(n, d, std::move(c));
}

SyntheticProblem problem_s(std::size_t n, std::size_t d, std::size_t m, std::uint64_t seed) {
  if (m > n) throw std::invalid_argument("problem_s: m must not exceed n");
  if (m == 0) throw std::invalid_argument("problem_s: m must be positive");
  SyntheticProblem s;
  s.points = uniform_cube(n, d, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> vals(m);
  for (double& v : vals) v = unif(rng);
  s.labels = LabelSet(std::move(idx), std::move(vals));
  return s;
}

LabeledCloud two_gaussians(std::size_t n, std::size_t d, double separation,
                           std::uint64_t seed) {
  if (n < 2 || d == 0) throw std::invalid_argument("two_gaussians: need n >= 2, d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LabeledCloud out;
  out.num_classes = 2;
  out.classes.resize(n);
  std::vector<double> c(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = static_cast<int>(i % 2);
    out.classes[i] = cls;
    for (std::size_t k = 0; k < d; ++k) c[i * d + k] = normal(rng);
    c[i * d] += (cls == 0 ? -0.5 : 0.5) * separation;
  }
  out.points = PointCloud(n, d, std::move(c));
  return out;
}

}  // namespace plap
