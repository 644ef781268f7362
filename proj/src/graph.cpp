#include "plap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace plap {

WeightedGraph WeightedGraph::from_edges(std::size_t n, std::vector<Edge> edges,
                                        double sigma, bool symmetric_hint) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("graph: sigma must be finite and >= 0");
  }
  for (const Edge& e : edges) {
    if (e.from >= n || e.to >= n) throw std::invalid_argument("graph: vertex out of range");
    if (e.from == e.to) throw std::invalid_argument("graph: self-loops are not allowed");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw std::invalid_argument("graph: weights must be finite and >= 0");
    }
  }
  std::erase_if(edges, [](const Edge& e) { return e.weight == 0.0; });
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.from < b.from || (a.from == b.from && a.to < b.to);
  });
  for (std::size_t t = 1; t < edges.size(); ++t) {
    if (edges[t].from == edges[t - 1].from && edges[t].to == edges[t - 1].to) {
      throw std::invalid_argument("graph: duplicate edge");
    }
  }

  WeightedGraph g;
  g.n_ = n;
  g.sigma_ = sigma;
  g.offsets_.assign(n + 1, 0);
  g.columns_.reserve(edges.size());
  g.weights_.reserve(edges.size());
  for (const Edge& e : edges) {
    ++g.offsets_[e.from + 1];
    g.columns_.push_back(e.to);
    g.weights_.push_back(e.weight);
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.finalize(symmetric_hint);
  return g;
}

WeightedGraph WeightedGraph::from_csr(std::size_t n, std::vector<std::size_t> offsets,
                                      std::vector<std::size_t> columns,
                                      std::vector<double> weights, double sigma) {
  if (offsets.size() != n + 1 || offsets.front() != 0 || offsets.back() != columns.size() ||
      columns.size() != weights.size()) {
    throw std::invalid_argument("graph: inconsistent CSR arrays");
  }
  std::vector<Edge> edges;
  edges.reserve(columns.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (offsets[i] > offsets[i + 1]) throw std::invalid_argument("graph: offsets decrease");
    for (std::size_t t = offsets[i]; t < offsets[i + 1]; ++t) {
      edges.push_back({i, columns[t], weights[t]});
    }
  }
  return from_edges(n, std::move(edges), sigma, true);
}

void WeightedGraph::finalize(bool symmetric_hint) {
  degrees_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (double w : weights(i)) s += w;
    degrees_[i] = s;
  }
  symmetric_ = symmetric_hint;
  if (symmetric_) {
    for (std::size_t i = 0; i < n_ && symmetric_; ++i) {
      const auto cols = neighbors(i);
      const auto ws = weights(i);
      for (std::size_t t = 0; t < cols.size(); ++t) {
        if (weight(cols[t], i) != ws[t]) {
          symmetric_ = false;
          break;
        }
      }
    }
  }
}

double WeightedGraph::weight(std::size_t i, std::size_t j) const {
  const auto cols = neighbors(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return weights_[offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
}

double WeightedGraph::max_weight() const {
  double m = 0.0;
  for (double w : weights_) m = std::max(m, w);
  return m;
}

WeightedGraph WeightedGraph::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("graph: scale must be positive");
  }
  WeightedGraph g = *this;
  for (double& w : g.weights_) w *= c;
  for (double& d : g.degrees_) d *= c;
  return g;
}

namespace {

void check_k(std::size_t k, std::size_t n, const char* what) {
  if (k == 0) throw std::invalid_argument(std::string(what) + ": k must be positive");
  if (k >= n) {
    throw std::invalid_argument(std::string(what) + ": k must be smaller than n (k=" +
                                std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
}

}  // namespace

WeightedGraph knn_graph(const PointCloud& points, std::size_t K, WeightRule rule,
                        std::size_t brute_force_limit) {
  const std::size_t n = points.size();
  check_k(K, n, "knn_graph");
  const NeighborSearch search(points, brute_force_limit);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * K);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : search.knn(i, K)) {
      pairs.emplace_back(std::min(i, nb.index), std::max(i, nb.index));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  double max_len = 0.0;
  std::size_t duplicates = 0;
  for (const auto& [i, j] : pairs) {
    max_len = std::max(max_len, points.distance(i, j));
  }
  const double sigma = 0.5 * max_len;

  std::vector<WeightedGraph::Edge> edges;
  edges.reserve(2 * pairs.size());
  for (const auto& [i, j] : pairs) {
    const double d2 = points.squared_distance(i, j);
    double w = 1.0;
    if (d2 == 0.0) {
      ++duplicates;
    } else if (rule == WeightRule::gaussian && sigma > 0.0) {
      w = std::exp(-d2 / (sigma * sigma));
    }
    edges.push_back({i, j, w});
    edges.push_back({j, i, w});
  }
  WeightedGraph g = WeightedGraph::from_edges(n, std::move(edges), sigma, true);
  if (duplicates > 0) {
    g.add_warning(std::to_string(duplicates) +
                  " edge(s) join duplicate points; assigned weight 1");
  }
  return g;
}

WeightedGraph eps_graph(const PointCloud& points, double eps, const Kernel& kernel,
                        std::size_t brute_force_limit) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("eps_graph: eps must be positive");
  }
  const std::size_t n = points.size();
  const NeighborSearch search(points, brute_force_limit);
  std::vector<WeightedGraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : search.within(i, eps * eps)) {
      const double w = kernel(std::sqrt(nb.dist2) / eps);
      if (w > 0.0) edges.push_back({i, nb.index, w});
    }
  }
  return WeightedGraph::from_edges(n, std::move(edges), 0.0, true);
}

KnnRadii knn_radii(const PointCloud& points, std::size_t k,
                   std::size_t brute_force_limit) {
  const std::size_t n = points.size();
  check_k(k, n, "knn_radii");
  const NeighborSearch search(points, brute_force_limit);
  KnnRadii r;
  r.k = k;
  r.eps_k.resize(n);
  r.eps_k_squared.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = search.knn(i, k).back().dist2;
    r.eps_k_squared[i] = d2;
    r.eps_k[i] = std::sqrt(d2);
  }
  return r;
}

WeightedGraph knn_kernel_graph(const PointCloud& points, std::size_t k,
                               const Kernel& kernel, KnnMode mode,
                               std::size_t brute_force_limit) {
  return knn_kernel_graph(points, knn_radii(points, k, brute_force_limit), kernel, mode,
                          brute_force_limit);
}

WeightedGraph knn_kernel_graph(const PointCloud& points, const KnnRadii& radii,
                               const Kernel& kernel, KnnMode mode,
                               std::size_t brute_force_limit) {
  const std::size_t n = points.size();
  if (radii.eps_k.size() != n) {
    throw std::invalid_argument("knn_kernel_graph: radii do not match the point cloud");
  }
  const NeighborSearch search(points, brute_force_limit);
  std::vector<WeightedGraph::Edge> edges;

  if (mode == KnnMode::nonsymmetric) {
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = radii.eps_k[i];
      for (const Neighbor& nb : search.within(i, radii.eps_k_squared[i])) {
        const double w = scale > 0.0 ? kernel(std::sqrt(nb.dist2) / scale) : kernel(0.0);
        if (w > 0.0) edges.push_back({i, nb.index, w});
      }
    }
    return WeightedGraph::from_edges(n, std::move(edges), 0.0, false);
  }

  // Symmetric: y is a candidate for x iff |x-y| <= eps_k(x) or <= eps_k(y).
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : search.within(i, radii.eps_k_squared[i])) {
      pairs.emplace_back(std::min(i, nb.index), std::max(i, nb.index));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  edges.reserve(2 * pairs.size());
  for (const auto& [i, j] : pairs) {
    const double scale = std::max(radii.eps_k[i], radii.eps_k[j]);
    const double dist = points.distance(i, j);
    const double w = scale > 0.0 ? kernel(dist / scale) : kernel(0.0);
    if (w > 0.0) {
      edges.push_back({i, j, w});
      edges.push_back({j, i, w});
    }
  }
  return WeightedGraph::from_edges(n, std::move(edges), 0.0, true);
}

bool is_connected(const WeightedGraph& graph) {
  const std::size_t n = graph.size();
  if (n <= 1) return true;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    for (std::size_t t = 0; t < cols.size(); ++t) {
      if (ws[t] <= 0.0) continue;
      const std::size_t a = find(i);
      const std::size_t b = find(cols[t]);
      if (a != b) {
        parent[std::max(a, b)] = std::min(a, b);
        --components;
      }
    }
  }
  return components == 1;
}

double edge_length_scale(const WeightedGraph& graph, const PointCloud& points) {
  double max_len = 0.0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (std::size_t j : graph.neighbors(i)) {
      max_len = std::max(max_len, points.distance(std::min(i, j), std::max(i, j)));
    }
  }
  return 0.5 * max_len;
}

}  // namespace plap
