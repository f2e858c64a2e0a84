#include "gslam/map/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace gslam {

void KdTree3::build(std::vector<Vec3> points) {
  points_ = std::move(points);
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.clear();
  nodes_.reserve(points_.empty() ? 1 : 2 * points_.size() / kLeafSize + 2);
  root_ = points_.empty() ? -1 : build_node(0, static_cast<int>(points_.size()));
}

int KdTree3::build_node(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int dim;
  (hi - lo).maxCoeff(&dim);

  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][dim], pb = points_[b][dim];
                     return pa < pb || (pa == pb && a < b);
                   });

  nodes_[id].dim = dim;
  nodes_[id].split = points_[order_[mid]][dim];
  const int left = build_node(begin, mid);
  const int right = build_node(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Visit>
void KdTree3::search(int node, const Vec3& q, double& worst_d2, const Visit& visit) const {
  const Node& n = nodes_[node];
  if (n.dim < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      visit(idx, (points_[idx] - q).squaredNorm());
    }
    return;
  }
  const double delta = q[n.dim] - n.split;
  const int near = delta < 0.0 ? n.left : n.right;
  const int far = delta < 0.0 ? n.right : n.left;
  search(near, q, worst_d2, visit);
  if (delta * delta <= worst_d2) search(far, q, worst_d2, visit);
}

int KdTree3::nearest(const Vec3& query, double* dist2) const {
  if (root_ < 0) return -1;
  int best = -1;
  double best_d2 = std::numeric_limits<double>::max();
  search(root_, query, best_d2, [&](int idx, double d2) {
    if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
      best = idx;
      best_d2 = d2;
    }
  });
  if (dist2) *dist2 = best_d2;
  return best;
}

void KdTree3::knn(const Vec3& query, int k, std::vector<int>& indices,
                  std::vector<double>& dist2) const {
  indices.clear();
  dist2.clear();
  if (root_ < 0 || k <= 0) return;

  using Cand = std::pair<double, int>;  // (d2, index), max-heap keeps the worst on top
  std::priority_queue<Cand> heap;
  double worst = std::numeric_limits<double>::max();
  search(root_, query, worst, [&](int idx, double d2) {
    const Cand c{d2, idx};
    if (static_cast<int>(heap.size()) < k) {
      heap.push(c);
      if (static_cast<int>(heap.size()) == k) worst = heap.top().first;
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
      worst = heap.top().first;
    }
  });

  std::vector<Cand> sorted;
  sorted.reserve(heap.size());
  while (!heap.empty()) {
    sorted.push_back(heap.top());
    heap.pop();
  }
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [d2, idx] : sorted) {
    indices.push_back(idx);
    dist2.push_back(d2);
  }
}

void KdTree3::radius(const Vec3& query, double r, std::vector<int>& indices) const {
  indices.clear();
  if (root_ < 0) return;
  double bound = r * r;
  search(root_, query, bound, [&](int idx, double d2) {
    if (d2 <= r * r) indices.push_back(idx);
  });
  std::sort(indices.begin(), indices.end());
}

}  // namespace gslam
