#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "plap/graph.hpp"
#include "plap/operators.hpp"

namespace fixtures {

// Unit-weight path 0 - 1 - ... - (n-1).
inline plap::WeightedGraph path(std::size_t n, double w = 1.0) {
  std::vector<plap::WeightedGraph::Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    e.push_back({i, i + 1, w});
    e.push_back({i + 1, i, w});
  }
  return plap::WeightedGraph::from_edges(n, std::move(e));
}

// Connected random graph: a random spanning tree plus extra edges, weights in
// (w_min, 1].
inline plap::WeightedGraph random_graph(std::size_t n, std::size_t extra, std::uint64_t seed,
                                        double w_min = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(w_min, 1.0);
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    adj[i][j] = adj[j][i] = w(rng);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t i = pick(rng), j = pick(rng);
    if (i != j) adj[i][j] = adj[j][i] = w(rng);
  }
  std::vector<plap::WeightedGraph::Edge> e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (adj[i][j] > 0.0) e.push_back({i, j, adj[i][j]});
    }
  }
  return plap::WeightedGraph::from_edges(n, std::move(e));
}

inline std::vector<double> random_field(std::size_t n, std::uint64_t seed, double lo = 0.0,
                                        double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> u(n);
  for (auto& x : u) x = d(rng);
  return u;
}

// Labels on the first m vertices with random values in [0, 1].
inline plap::LabelSet random_labels(std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  return plap::LabelSet(idx, random_field(m, seed));
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fixtures
