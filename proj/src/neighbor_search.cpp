#include "plap/neighbor_search.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace plap {

struct NeighborSearch::Tree {
  static constexpr std::size_t kLeafSize = 16;

  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t dim = 0;
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  const PointCloud& pts;
  std::vector<std::size_t> order;
  std::vector<Node> nodes;

  explicit Tree(const PointCloud& p) : pts(p), order(p.size()) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    nodes.reserve(2 * p.size() / kLeafSize + 2);
    build(0, p.size());
  }

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    const std::size_t d = pts.dim();
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t k = 0; k < d; ++k) {
      double lo = pts.point(order[begin])[k];
      double hi = lo;
      for (std::size_t t = begin + 1; t < end; ++t) {
        const double v = pts.point(order[t])[k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = k;
      }
    }
    if (best_spread <= 0.0) return id;  // all coincident: keep as a leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin),
                     order.begin() + static_cast<std::ptrdiff_t>(mid),
                     order.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return pts.point(a)[best_dim] < pts.point(b)[best_dim];
                     });
    const double split = pts.point(order[mid])[best_dim];
    nodes[id].dim = best_dim;
    nodes[id].split = split;
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }

  using Heap = std::priority_queue<Neighbor, std::vector<Neighbor>,
                                   decltype(&neighbor_less)>;

  void knn(int id, std::size_t self, std::span<const double> q, std::size_t k,
           Heap& heap) const {
    const Node& node = nodes[id];
    if (node.left < 0) {
      for (std::size_t t = node.begin; t < node.end; ++t) {
        const std::size_t j = order[t];
        if (j == self) continue;
        const Neighbor cand{j, squared_distance(q, pts.point(j))};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (neighbor_less(cand, heap.top())) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    const double diff = q[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    knn(near, self, q, k, heap);
    if (heap.size() < k || diff * diff <= heap.top().dist2) {
      knn(far, self, q, k, heap);
    }
  }

  void within(int id, std::size_t self, std::span<const double> q, double r2,
              std::vector<Neighbor>& out) const {
    const Node& node = nodes[id];
    if (node.left < 0) {
      for (std::size_t t = node.begin; t < node.end; ++t) {
        const std::size_t j = order[t];
        if (j == self) continue;
        const double d2 = squared_distance(q, pts.point(j));
        if (d2 <= r2) out.push_back({j, d2});
      }
      return;
    }
    const double diff = q[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    within(near, self, q, r2, out);
    if (diff * diff <= r2) within(far, self, q, r2, out);
  }
};

NeighborSearch::NeighborSearch(const PointCloud& points,
                               std::size_t brute_force_limit)
    : points_(&points) {
  if (points.size() > brute_force_limit) {
    tree_ = std::make_unique<Tree>(points);
  }
}

NeighborSearch::~NeighborSearch() = default;
NeighborSearch::NeighborSearch(NeighborSearch&&) noexcept = default;
NeighborSearch& NeighborSearch::operator=(NeighborSearch&&) noexcept = default;

std::vector<Neighbor> NeighborSearch::knn(std::size_t i, std::size_t k) const {
  const PointCloud& pts = *points_;
  const std::size_t n = pts.size();
  if (k >= n) {
    throw std::invalid_argument("knn: k must be smaller than the number of points");
  }
  std::vector<Neighbor> out;
  if (k == 0) return out;
  const auto q = pts.point(i);

  if (tree_) {
    Tree::Heap heap(&neighbor_less);
    tree_->knn(0, i, q, k, heap);
    out.reserve(k);
    while (!heap.empty()) {
      out.push_back(heap.top());
      heap.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  out.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) out.push_back({j, squared_distance(q, pts.point(j))});
  }
  std::nth_element(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   out.end(), neighbor_less);
  out.resize(k);
  std::sort(out.begin(), out.end(), neighbor_less);
  return out;
}

std::vector<Neighbor> NeighborSearch::within(std::size_t i, double radius2) const {
  const PointCloud& pts = *points_;
  std::vector<Neighbor> out;
  const auto q = pts.point(i);
  if (tree_) {
    tree_->within(0, i, q, radius2, out);
    std::sort(out.begin(), out.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    return out;
  }
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    const double d2 = squared_distance(q, pts.point(j));
    if (d2 <= radius2) out.push_back({j, d2});
  }
  return out;
}

}  // namespace plap
