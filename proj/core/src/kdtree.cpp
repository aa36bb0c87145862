#include "shred/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace shred {
namespace {

constexpr std::uint32_t kLeafSize = 12;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) {
  std::vector<std::size_t> all(points.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  *this = KdTree(points, all);
}

KdTree::KdTree(std::span<const Vec3> points, std::span<const std::size_t> subset)
    : ids_(subset.begin(), subset.end()) {
  pts_.reserve(ids_.size());
  for (auto id : ids_) pts_.push_back(points[id]);
  if (!ids_.empty()) {
    nodes_.reserve(2 * ids_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<std::uint32_t>(ids_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return index;

  Vec3 lo = pts_[begin];
  Vec3 hi = pts_[begin];
  for (auto i = begin + 1; i < end; ++i) {
    lo = {std::min(lo.x, pts_[i].x), std::min(lo.y, pts_[i].y),
          std::min(lo.z, pts_[i].z)};
    hi = {std::max(hi.x, pts_[i].x), std::max(hi.y, pts_[i].y),
          std::max(hi.z, pts_[i].z)};
  }
  const Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;
  if (extent[axis] <= 0.0) return index;  // all coincident: keep as leaf

  // Sort a permutation so points and ids stay aligned.
  std::vector<std::uint32_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  const auto mid = order.begin() + static_cast<std::ptrdiff_t>(order.size() / 2);
  std::nth_element(order.begin(), mid, order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = pts_[a][axis];
                     const double cb = pts_[b][axis];
                     return ca < cb || (ca == cb && ids_[a] < ids_[b]);
                   });
  std::vector<Vec3> p(order.size());
  std::vector<std::size_t> ids(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    p[i] = pts_[order[i]];
    ids[i] = ids_[order[i]];
  }
  std::copy(p.begin(), p.end(), pts_.begin() + begin);
  std::copy(ids.begin(), ids.end(), ids_.begin() + begin);

  const auto split_at = begin + static_cast<std::uint32_t>(order.size() / 2);
  const double split = pts_[split_at][axis];
  const auto left = build(begin, split_at);
  const auto right = build(split_at, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  nodes_[index].axis = axis;
  nodes_[index].split = split;
  return index;
}

Neighbor KdTree::nearest(const Vec3& query) const {
  Neighbor best{std::numeric_limits<std::size_t>::max(),
                std::numeric_limits<double>::infinity()};
  if (root_ >= 0) nearest_rec(root_, query, best);
  return best;
}

Neighbor KdTree::nearest_within(const Vec3& query, double r) const {
  Neighbor best{std::numeric_limits<std::size_t>::max(), r * r};
  if (root_ >= 0) nearest_rec(root_, query, best);
  if (best.index == std::numeric_limits<std::size_t>::max()) best.dist2 = -1.0;
  return best;
}

void KdTree::nearest_rec(std::int32_t node_id, const Vec3& q,
                         Neighbor& best) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const Neighbor cand{ids_[i], squared_distance(pts_[i], q)};
      if (closer(cand, best)) best = cand;
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff < 0.0 ? node.left : node.right;
  const auto far = diff < 0.0 ? node.right : node.left;
  nearest_rec(near, q, best);
  if (diff * diff <= best.dist2) nearest_rec(far, q, best);
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0 || root_ < 0) return heap;
  heap.reserve(k + 1);
  knn_rec(root_, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::knn_rec(std::int32_t node_id, const Vec3& q, std::size_t k,
                     std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const Neighbor cand{ids_[i], squared_distance(pts_[i], q)};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff < 0.0 ? node.left : node.right;
  const auto far = diff < 0.0 ? node.right : node.left;
  knn_rec(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().dist2) {
    knn_rec(far, q, k, heap);
  }
}

std::vector<std::size_t> KdTree::radius(const Vec3& query, double r) const {
  std::vector<std::size_t> out;
  if (root_ >= 0 && r >= 0.0) radius_rec(root_, query, r * r, out);
  return out;
}

void KdTree::radius_rec(std::int32_t node_id, const Vec3& q, double r2,
                        std::vector<std::size_t>& out) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      if (squared_distance(pts_[i], q) <= r2) out.push_back(ids_[i]);
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  if (diff <= 0.0 || diff * diff <= r2) radius_rec(node.left, q, r2, out);
  if (diff >= 0.0 || diff * diff <= r2) radius_rec(node.right, q, r2, out);
}

}  // namespace shred
