#pragma once

#include <vector>

#include "gslam/core/types.hpp"

namespace gslam {

/// Static kd-tree over 3D points. Queries reproduce brute-force results
/// exactly: candidates are ordered by (squared distance, index), so ties
/// resolve to the lowest index, and radius searches are inclusive.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::vector<Vec3> points) { build(std::move(points)); }

  void build(std::vector<Vec3> points);

  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(int i) const { return points_[i]; }

  /// Index of the nearest point, -1 when empty.
  int nearest(const Vec3& query, double* dist2 = nullptr) const;

  /// The k nearest points as (index, squared distance), sorted ascending.
  void knn(const Vec3& query, int k, std::vector<int>& indices,
           std::vector<double>& dist2) const;

  /// Indices within radius (inclusive), ascending index order.
  void radius(const Vec3& query, double r, std::vector<int>& indices) const;

 private:
  struct Node {
    double split = 0.0;
    int dim = -1;        // -1 marks a leaf
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build_node(int begin, int end);

  template <typename Visit>
  void search(int node, const Vec3& q, double& worst_d2, const Visit& visit) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

}  // namespace gslam
