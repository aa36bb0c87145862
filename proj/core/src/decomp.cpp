#include "shred/decomp.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "shred/error.hpp"
#include "shred/kdtree.hpp"

namespace shred {
namespace {

struct FpsResult {
  std::vector<std::size_t> centroids;
  std::vector<RegionId> owner;
};

FpsResult run_fps(const Shape& shape, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("fps_cluster: k must be at least 1");
  const auto pos = shape.positions();
  const std::size_t n = pos.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FpsResult out;
  out.owner.assign(n, 0);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t current = order.front();
  const std::size_t limit = std::min(k, n);
  for (std::size_t c = 0; c < limit; ++c) {
    out.centroids.push_back(current);
    const Vec3 center = pos[current];
    std::size_t farthest = 0;
    double farthest_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_distance(pos[i], center);
      if (d < dist[i]) {
        dist[i] = d;
        out.owner[i] = static_cast<RegionId>(c);
      }
      if (dist[i] > farthest_d) {
        farthest_d = dist[i];
        farthest = i;
      }
    }
    if (farthest_d <= 0.0) break;  // every point sits on a centroid
    current = farthest;
  }
  return out;
}

}  // namespace

RegionDecomposition fps_cluster(const Shape& shape, std::size_t k,
                                std::uint64_t seed) {
  auto result = run_fps(shape, k, seed);
  const auto count = static_cast<RegionId>(result.centroids.size());
  return RegionDecomposition(shape.id(), std::move(result.owner), count);
}

std::vector<std::size_t> fps_centroids(const Shape& shape, std::size_t k,
                                       std::uint64_t seed) {
  return run_fps(shape, k, seed).centroids;
}

AdjacencyGraph adjacency(const Shape& shape, const RegionDecomposition& decomp,
                         double threshold) {
  AdjacencyGraph graph;
  graph.threshold = threshold;
  const auto pos = shape.positions();
  const auto labels = decomp.labels();
  const KdTree tree(pos);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (auto j : tree.radius(pos[i], threshold)) {
      if (j > i && labels[j] != labels[i]) {
        graph.pairs.insert(make_pair_ordered(labels[i], labels[j]));
      }
    }
  }
  return graph;
}

std::vector<std::pair<RegionId, RegionId>> adjacency_components(
    const RegionDecomposition& decomp, const AdjacencyGraph& graph) {
  std::map<RegionId, RegionId> parent;
  for (auto id : decomp.region_ids()) parent[id] = id;
  auto find = [&](RegionId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [a, b] : graph.pairs) {
    const auto ra = find(a);
    const auto rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::pair<RegionId, RegionId>> out;
  for (const auto& [id, p] : parent) out.emplace_back(id, find(id));
  return out;
}

}  // namespace shred
