#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shred/geometry.hpp"

namespace shred {

using RegionId = std::uint32_t;
using PartId = std::uint32_t;
using Rng = std::mt19937_64;

/// A point-sampled shape. Normals are unit length and ground-truth instance
/// labels (when present) are dense in 0..G-1.
class Shape {
 public:
  /// Validates sizes, normalizes normals and densifies `gt_labels`.
  /// Throws shred::Error on empty input, size mismatch or zero normals.
  Shape(std::string id, std::vector<Vec3> positions, std::vector<Vec3> normals,
        std::optional<std::vector<std::int64_t>> gt_labels = std::nullopt,
        std::optional<std::vector<std::int64_t>> gt_semantic = std::nullopt);

  const std::string& id() const { return id_; }
  std::size_t size() const { return positions_.size(); }
  std::span<const Vec3> positions() const { return positions_; }
  std::span<const Vec3> normals() const { return normals_; }

  bool has_gt() const { return gt_labels_.has_value(); }
  /// Dense ground-truth instance labels; throws if the shape has none.
  std::span<const PartId> gt_labels() const;
  std::size_t gt_part_count() const { return gt_part_count_; }
  const std::optional<std::vector<std::int64_t>>& gt_semantic() const {
    return gt_semantic_;
  }

 private:
  std::string id_;
  std::vector<Vec3> positions_;
  std::vector<Vec3> normals_;
  std::optional<std::vector<PartId>> gt_labels_;
  std::optional<std::vector<std::int64_t>> gt_semantic_;
  std::size_t gt_part_count_ = 0;
};

/// Returns a copy of `shape` with positions mapped into the unit ball.
Shape normalized_copy(const Shape& shape);

/// Per-point region assignment. Every label maps to a non-empty point set and
/// `next_id` exceeds every label in use.
class RegionDecomposition {
 public:
  RegionDecomposition() = default;
  RegionDecomposition(std::string shape_id, std::vector<RegionId> labels);
  RegionDecomposition(std::string shape_id, std::vector<RegionId> labels,
                      RegionId next_id);

  /// Ground-truth decomposition R* of a labeled shape.
  static RegionDecomposition from_ground_truth(const Shape& shape);

  const std::string& shape_id() const { return shape_id_; }
  std::size_t size() const { return labels_.size(); }
  std::span<const RegionId> labels() const { return labels_; }
  RegionId label(std::size_t point) const { return labels_[point]; }
  RegionId next_id() const { return next_id_; }

  RegionId fresh_id() { return next_id_++; }
  void assign(std::size_t point, RegionId region);

  /// Sorted distinct region ids.
  std::vector<RegionId> region_ids() const;
  std::size_t region_count() const { return region_ids().size(); }
  /// Point indices of every region, ascending within each region.
  std::map<RegionId, std::vector<std::size_t>> members() const;
  std::vector<std::size_t> members_of(RegionId region) const;

  /// Throws shred::Error if the partition invariants do not hold for a shape
  /// of `point_count` points.
  void validate(std::size_t point_count) const;

  friend bool operator==(const RegionDecomposition&,
                         const RegionDecomposition&) = default;

 private:
  std::string shape_id_;
  std::vector<RegionId> labels_;
  RegionId next_id_ = 0;
};

/// True when both label vectors induce the same partition, ignoring ids.
bool same_partition(std::span<const RegionId> a, std::span<const RegionId> b);

/// A region's points mapped into the unit ball.
struct NormalizedRegion {
  std::vector<std::size_t> point_indices;
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  Transform transform;
};

/// Centers on the centroid and scales so the farthest point has norm 1.
/// Coincident inputs keep scale 1. Throws "empty point set" on empty input.
std::pair<std::vector<Vec3>, Transform> normalize_unit_sphere(
    std::span<const Vec3> points);

NormalizedRegion normalize_region(const Shape& shape,
                                  std::vector<std::size_t> point_indices);

/// Exactly `target` entries: a uniform sample without replacement when
/// enough indices exist, otherwise every index plus uniform draws with
/// replacement.
std::vector<std::size_t> subsample_points(std::span<const std::size_t> indices,
                                          std::size_t target, Rng& rng);

/// Minimum Euclidean distance between any point of `a` and any point of `b`.
double min_region_distance(const Shape& shape,
                           const RegionDecomposition& decomp, RegionId a,
                           RegionId b);

}  // namespace shred
