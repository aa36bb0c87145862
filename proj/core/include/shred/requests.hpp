#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shred/kdtree.hpp"
#include "shred/shape.hpp"

namespace shred {

inline constexpr std::size_t kSplitPoints = 512;
inline constexpr std::size_t kSplitSlots = 10;
inline constexpr std::size_t kFixInsidePoints = 2048;
inline constexpr std::size_t kFixOutsidePoints = 2048;
inline constexpr std::size_t kFixPoints = kFixInsidePoints + kFixOutsidePoints;
inline constexpr std::size_t kMergeRegionPoints = 512;
inline constexpr std::size_t kMergeOutsidePoints = 1024;
inline constexpr std::size_t kMergePoints =
    2 * kMergeRegionPoints + kMergeOutsidePoints;

/// One region, subsampled to kSplitPoints and normalized.
struct SplitRequest {
  std::string shape_id;
  RegionId region = 0;
  NormalizedRegion points;
  /// Every point of the region, ascending. Not part of the network input.
  std::vector<std::size_t> region_members;
};

struct SplitResponse {
  std::vector<std::uint8_t> slots;  // one per request point, < kSplitSlots
};

/// kFixInsidePoints region points followed by kFixOutsidePoints nearby
/// outside points, normalized jointly.
struct FixRequest {
  std::string shape_id;
  RegionId region = 0;
  NormalizedRegion points;
  std::vector<std::uint8_t> inside_flags;
  std::vector<std::size_t> region_members;
  /// Set when no outside points were in range and the region's own outer
  /// points were used as the outside half.
  bool boundary_fallback = false;
};

struct FixResponse {
  std::vector<float> inside_prob;  // one per request point, in [0, 1]
};

/// kMergeRegionPoints from each region followed by kMergeOutsidePoints
/// nearby outside points, normalized jointly.
struct MergeRequest {
  std::string shape_id;
  RegionId first = 0;
  RegionId second = 0;
  NormalizedRegion points;
  std::vector<std::uint8_t> in_first;
  std::vector<std::uint8_t> in_second;
  std::vector<std::size_t> first_members;
  std::vector<std::size_t> second_members;
  bool boundary_fallback = false;
};

struct MergeResponse {
  float probability = 0.0f;
};

/// Points near a region (or pair of regions): everything outside it within
/// `extension` of the bounding sphere given by its centroid and radius.
struct Neighborhood {
  Vec3 center;
  double radius = 0.0;
  std::vector<std::size_t> outside;  // ascending
};

Neighborhood region_neighborhood(const Shape& shape, const KdTree& tree,
                                 std::span<const RegionId> labels,
                                 std::span<const std::size_t> members,
                                 RegionId a, RegionId b, double extension);

/// Outermost quarter of `members` by distance from `center` (at least one),
/// used when a region has no outside points in range.
std::vector<std::size_t> boundary_points(const Shape& shape,
                                         std::span<const std::size_t> members,
                                         const Vec3& center);

SplitRequest make_split_request(const Shape& shape, RegionId region,
                                std::vector<std::size_t> members, Rng& rng);

FixRequest make_fix_request(const Shape& shape, RegionId region,
                            std::vector<std::size_t> members,
                            const Neighborhood& neighborhood, Rng& rng);

MergeRequest make_merge_request(const Shape& shape, RegionId first,
                                RegionId second,
                                std::vector<std::size_t> first_members,
                                std::vector<std::size_t> second_members,
                                const Neighborhood& neighborhood, Rng& rng);

/// Row-major per-point features: xyz, normal, then the request's flags.
std::vector<float> split_features(const SplitRequest& request);
std::vector<float> fix_features(const FixRequest& request);
std::vector<float> merge_features(const MergeRequest& request);

/// 64-bit FNV-1a over the sorted indices, each as a little-endian uint64.
std::uint64_t request_digest(std::span<const std::size_t> point_indices);

}  // namespace shred
