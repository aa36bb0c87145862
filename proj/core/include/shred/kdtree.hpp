#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shred/geometry.hpp"

namespace shred {

struct Neighbor {
  std::size_t index;  // index into the caller's point array
  double dist2;
};

/// Static 3-d tree over a subset of a point array. Radius queries are
/// inclusive (dist^2 <= r^2); nearest-neighbour ties resolve to the lower
/// point index so results are reproducible.
class KdTree {
 public:
  KdTree() = default;
  /// Index every point in `points`.
  explicit KdTree(std::span<const Vec3> points);
  /// Index only `subset` (indices into `points`).
  KdTree(std::span<const Vec3> points, std::span<const std::size_t> subset);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  Neighbor nearest(const Vec3& query) const;
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;
  std::vector<std::size_t> radius(const Vec3& query, double r) const;
  /// Nearest indexed point within `r`, if any (dist2 < 0 otherwise).
  Neighbor nearest_within(const Vec3& query, double r) const;

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void nearest_rec(std::int32_t node, const Vec3& q, Neighbor& best) const;
  void knn_rec(std::int32_t node, const Vec3& q, std::size_t k,
               std::vector<Neighbor>& heap) const;
  void radius_rec(std::int32_t node, const Vec3& q, double r2,
                  std::vector<std::size_t>& out) const;

  std::vector<Vec3> pts_;
  std::vector<std::size_t> ids_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace shred
