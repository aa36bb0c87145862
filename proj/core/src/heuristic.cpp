#include "shred/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "shred/kdtree.hpp"

namespace shred {

SplitResponse heuristic_split(const SplitRequest& request,
                              const HeuristicSplitParams& params) {
  const auto& pos = request.points.positions;
  const auto& nrm = request.points.normals;
  const std::size_t n = pos.size();
  SplitResponse out;
  out.slots.assign(n, 0);
  if (n <= 1) return out;

  const KdTree tree(pos);
  std::vector<std::vector<Neighbor>> knn(n);
  std::vector<double> lengths;
  for (std::size_t i = 0; i < n; ++i) {
    // k + 1 because the query point is its own nearest neighbour.
    for (const auto& nb : tree.knn(pos[i], params.neighbors + 1)) {
      if (nb.index == i) continue;
      knn[i].push_back(nb);
      // Upsampled requests repeat points; keep duplicates out of the median.
      if (nb.dist2 > 0.0) lengths.push_back(std::sqrt(nb.dist2));
    }
  }
  double max_len = 0.0;
  if (!lengths.empty()) {
    auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
    std::nth_element(lengths.begin(), mid, lengths.end());
    max_len = params.length_factor * *mid;
  }
  const double min_cos =
      std::cos(params.max_normal_angle_deg * std::numbers::pi / 180.0);

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : knn[i]) {
      if (std::sqrt(nb.dist2) > max_len) continue;
      if (dot(nrm[i], nrm[nb.index]) < min_cos) continue;
      const auto a = find(i);
      const auto b = find(nb.index);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }

  // Roots are the smallest member index of each component.
  std::vector<std::size_t> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++size[find(i)];
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (find(i) == i) roots.push_back(i);
  }
  std::stable_sort(roots.begin(), roots.end(),
                   [&](auto a, auto b) { return size[a] > size[b]; });

  constexpr auto kUnassigned = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> slot_of_root(n, kUnassigned);
  for (std::size_t r = 0; r < roots.size() && r < kSplitSlots; ++r) {
    slot_of_root[roots[r]] = r;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (slot_of_root[find(i)] != kUnassigned) kept.push_back(i);
  }
  const KdTree kept_tree(pos, kept);
  for (std::size_t r = kSplitSlots; r < roots.size(); ++r) {
    // The whole overflow component joins the slot of its closest kept point.
    Neighbor best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < n; ++i) {
      if (find(i) != roots[r]) continue;
      const auto nb = kept_tree.nearest(pos[i]);
      if (nb.dist2 < best.dist2) best = nb;
    }
    slot_of_root[roots[r]] = slot_of_root[find(best.index)];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.slots[i] = static_cast<std::uint8_t>(slot_of_root[find(i)]);
  }
  return out;
}

}  // namespace shred
