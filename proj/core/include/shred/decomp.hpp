#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "shred/shape.hpp"

namespace shred {

using RegionPair = std::pair<RegionId, RegionId>;  // always first < second

inline RegionPair make_pair_ordered(RegionId a, RegionId b) {
  return a < b ? RegionPair{a, b} : RegionPair{b, a};
}

/// Regions whose minimum point-to-point distance is at most `threshold`.
struct AdjacencyGraph {
  std::set<RegionPair> pairs;
  double threshold = 0.0;
};

/// Farthest-point sampling clustering: picks up to `k` centroids by iterative
/// farthest-point selection and assigns every point to its nearest centroid
/// (ties to the earlier centroid). The first centroid is the head of a
/// seeded shuffle of the point indices. Selection stops early once every
/// point coincides with a centroid, so no region is ever empty. Region ids
/// are the centroid selection order.
RegionDecomposition fps_cluster(const Shape& shape, std::size_t k,
                                std::uint64_t seed);

/// Centroid point indices chosen by fps_cluster, in selection order.
std::vector<std::size_t> fps_centroids(const Shape& shape, std::size_t k,
                                       std::uint64_t seed);

AdjacencyGraph adjacency(const Shape& shape, const RegionDecomposition& decomp,
                         double threshold);

/// Connected components of the region graph, as a map region -> component
/// representative (the smallest region id in the component).
std::vector<std::pair<RegionId, RegionId>> adjacency_components(
    const RegionDecomposition& decomp, const AdjacencyGraph& graph);

}  // namespace shred
