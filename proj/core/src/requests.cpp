#include "shred/requests.hpp"

#include <algorithm>

#include "shred/error.hpp"

namespace shred {
namespace {

void append_xyz_normal(std::vector<float>& out, const NormalizedRegion& pts,
                       std::size_t i) {
  const auto& p = pts.positions[i];
  const auto& n = pts.normals[i];
  out.insert(out.end(), {static_cast<float>(p.x), static_cast<float>(p.y),
                         static_cast<float>(p.z), static_cast<float>(n.x),
                         static_cast<float>(n.y), static_cast<float>(n.z)});
}

}  // namespace

Neighborhood region_neighborhood(const Shape& shape, const KdTree& tree,
                                 std::span<const RegionId> labels,
                                 std::span<const std::size_t> members,
                                 RegionId a, RegionId b, double extension) {
  if (members.empty()) throw Error("neighborhood of an empty region");
  const auto pos = shape.positions();
  Neighborhood nb;
  for (auto i : members) nb.center += pos[i];
  nb.center *= 1.0 / static_cast<double>(members.size());
  double r2 = 0.0;
  for (auto i : members) r2 = std::max(r2, squared_distance(pos[i], nb.center));
  nb.radius = std::sqrt(r2);
  for (auto j : tree.radius(nb.center, nb.radius + extension)) {
    if (labels[j] != a && labels[j] != b) nb.outside.push_back(j);
  }
  std::sort(nb.outside.begin(), nb.outside.end());
  return nb;
}

std::vector<std::size_t> boundary_points(const Shape& shape,
                                         std::span<const std::size_t> members,
                                         const Vec3& center) {
  const auto pos = shape.positions();
  std::vector<std::size_t> order(members.begin(), members.end());
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
    return squared_distance(pos[x], center) > squared_distance(pos[y], center);
  });
  order.resize(std::max<std::size_t>(1, order.size() / 4));
  std::sort(order.begin(), order.end());
  return order;
}

SplitRequest make_split_request(const Shape& shape, RegionId region,
                                std::vector<std::size_t> members, Rng& rng) {
  SplitRequest req;
  req.shape_id = shape.id();
  req.region = region;
  req.points = normalize_region(shape, subsample_points(members, kSplitPoints, rng));
  req.region_members = std::move(members);
  return req;
}

FixRequest make_fix_request(const Shape& shape, RegionId region,
                            std::vector<std::size_t> members,
                            const Neighborhood& neighborhood, Rng& rng) {
  FixRequest req;
  req.shape_id = shape.id();
  req.region = region;
  auto indices = subsample_points(members, kFixInsidePoints, rng);
  std::vector<std::size_t> outside;
  if (neighborhood.outside.empty()) {
    req.boundary_fallback = true;
    outside = subsample_points(boundary_points(shape, members, neighborhood.center),
                               kFixOutsidePoints, rng);
  } else {
    outside = subsample_points(neighborhood.outside, kFixOutsidePoints, rng);
  }
  indices.insert(indices.end(), outside.begin(), outside.end());
  req.inside_flags.assign(kFixPoints, 0);
  std::fill_n(req.inside_flags.begin(), kFixInsidePoints, 1);
  req.points = normalize_region(shape, std::move(indices));
  req.region_members = std::move(members);
  return req;
}

MergeRequest make_merge_request(const Shape& shape, RegionId first,
                                RegionId second,
                                std::vector<std::size_t> first_members,
                                std::vector<std::size_t> second_members,
                                const Neighborhood& neighborhood, Rng& rng) {
  MergeRequest req;
  req.shape_id = shape.id();
  req.first = first;
  req.second = second;
  auto indices = subsample_points(first_members, kMergeRegionPoints, rng);
  auto from_second = subsample_points(second_members, kMergeRegionPoints, rng);
  indices.insert(indices.end(), from_second.begin(), from_second.end());
  std::vector<std::size_t> outside;
  if (neighborhood.outside.empty()) {
    req.boundary_fallback = true;
    std::vector<std::size_t> both = first_members;
    both.insert(both.end(), second_members.begin(), second_members.end());
    std::sort(both.begin(), both.end());
    outside = subsample_points(boundary_points(shape, both, neighborhood.center),
                               kMergeOutsidePoints, rng);
  } else {
    outside = subsample_points(neighborhood.outside, kMergeOutsidePoints, rng);
  }
  indices.insert(indices.end(), outside.begin(), outside.end());
  req.in_first.assign(kMergePoints, 0);
  req.in_second.assign(kMergePoints, 0);
  std::fill_n(req.in_first.begin(), kMergeRegionPoints, 1);
  std::fill_n(req.in_second.begin() + kMergeRegionPoints, kMergeRegionPoints, 1);
  req.points = normalize_region(shape, std::move(indices));
  req.first_members = std::move(first_members);
  req.second_members = std::move(second_members);
  return req;
}

std::vector<float> split_features(const SplitRequest& request) {
  std::vector<float> out;
  out.reserve(request.points.positions.size() * 6);
  for (std::size_t i = 0; i < request.points.positions.size(); ++i) {
    append_xyz_normal(out, request.points, i);
  }
  return out;
}

std::vector<float> fix_features(const FixRequest& request) {
  std::vector<float> out;
  out.reserve(request.points.positions.size() * 7);
  for (std::size_t i = 0; i < request.points.positions.size(); ++i) {
    append_xyz_normal(out, request.points, i);
    out.push_back(static_cast<float>(request.inside_flags[i]));
  }
  return out;
}

std::vector<float> merge_features(const MergeRequest& request) {
  std::vector<float> out;
  out.reserve(request.points.positions.size() * 8);
  for (std::size_t i = 0; i < request.points.positions.size(); ++i) {
    append_xyz_normal(out, request.points, i);
    out.push_back(static_cast<float>(request.in_first[i]));
    out.push_back(static_cast<float>(request.in_second[i]));
  }
  return out;
}

std::uint64_t request_digest(std::span<const std::size_t> point_indices) {
  std::vector<std::uint64_t> sorted(point_indices.begin(), point_indices.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (auto v : sorted) {
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (v >> (8 * byte)) & 0xffU;
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

}  // namespace shred
