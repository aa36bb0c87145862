#include "shred/shape.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "shred/error.hpp"
#include "shred/kdtree.hpp"

namespace shred {

Shape::Shape(std::string id, std::vector<Vec3> positions,
             std::vector<Vec3> normals,
             std::optional<std::vector<std::int64_t>> gt_labels,
             std::optional<std::vector<std::int64_t>> gt_semantic)
    : id_(std::move(id)),
      positions_(std::move(positions)),
      normals_(std::move(normals)),
      gt_semantic_(std::move(gt_semantic)) {
  if (positions_.empty()) throw Error("empty point set");
  if (normals_.size() != positions_.size()) {
    throw Error("shape '" + id_ + "': normals/positions size mismatch");
  }
  for (std::size_t i = 0; i < normals_.size(); ++i) {
    const double len = norm(normals_[i]);
    if (!(len > 1e-12)) {
      throw Error("shape '" + id_ + "': zero-length normal at point " +
                  std::to_string(i));
    }
    normals_[i] *= 1.0 / len;
  }
  if (gt_semantic_ && gt_semantic_->size() != positions_.size()) {
    throw Error("shape '" + id_ + "': semantic label count mismatch");
  }
  if (gt_labels) {
    if (gt_labels->size() != positions_.size()) {
      throw Error("shape '" + id_ + "': gt label count mismatch");
    }
    std::vector<std::int64_t> distinct = *gt_labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.front() < 0) {
      throw Error("shape '" + id_ + "': negative gt label");
    }
    std::vector<PartId> dense(gt_labels->size());
    for (std::size_t i = 0; i < dense.size(); ++i) {
      dense[i] = static_cast<PartId>(
          std::lower_bound(distinct.begin(), distinct.end(), (*gt_labels)[i]) -
          distinct.begin());
    }
    gt_labels_ = std::move(dense);
    gt_part_count_ = distinct.size();
  }
}

std::span<const PartId> Shape::gt_labels() const {
  if (!gt_labels_) throw Error("shape '" + id_ + "' has no ground truth");
  return *gt_labels_;
}

Shape normalized_copy(const Shape& shape) {
  auto [positions, transform] = normalize_unit_sphere(shape.positions());
  std::optional<std::vector<std::int64_t>> gt;
  if (shape.has_gt()) {
    const auto labels = shape.gt_labels();
    gt.emplace(labels.begin(), labels.end());
  }
  return Shape(shape.id(),
               std::move(positions),
               std::vector<Vec3>(shape.normals().begin(), shape.normals().end()),
               std::move(gt), shape.gt_semantic());
}

RegionDecomposition::RegionDecomposition(std::string shape_id,
                                         std::vector<RegionId> labels)
    : shape_id_(std::move(shape_id)), labels_(std::move(labels)) {
  next_id_ = labels_.empty()
                 ? 0
                 : *std::max_element(labels_.begin(), labels_.end()) + 1;
}

RegionDecomposition::RegionDecomposition(std::string shape_id,
                                         std::vector<RegionId> labels,
                                         RegionId next_id)
    : shape_id_(std::move(shape_id)), labels_(std::move(labels)),
      next_id_(next_id) {
  if (!labels_.empty() &&
      *std::max_element(labels_.begin(), labels_.end()) >= next_id_) {
    throw Error("decomposition of '" + shape_id_ +
                "': next id must exceed every region id");
  }
}

RegionDecomposition RegionDecomposition::from_ground_truth(const Shape& shape) {
  const auto gt = shape.gt_labels();
  return RegionDecomposition(shape.id(),
                             std::vector<RegionId>(gt.begin(), gt.end()));
}

void RegionDecomposition::assign(std::size_t point, RegionId region) {
  labels_[point] = region;
  if (region >= next_id_) next_id_ = region + 1;
}

std::vector<RegionId> RegionDecomposition::region_ids() const {
  std::vector<RegionId> ids(labels_.begin(), labels_.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::map<RegionId, std::vector<std::size_t>> RegionDecomposition::members()
    const {
  std::map<RegionId, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(i);
  return out;
}

std::vector<std::size_t> RegionDecomposition::members_of(RegionId region) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == region) out.push_back(i);
  }
  return out;
}

void RegionDecomposition::validate(std::size_t point_count) const {
  if (labels_.size() != point_count) {
    throw Error("decomposition of '" + shape_id_ + "' has " +
                std::to_string(labels_.size()) + " labels for " +
                std::to_string(point_count) + " points");
  }
  for (auto label : labels_) {
    if (label >= next_id_) {
      throw Error("decomposition of '" + shape_id_ +
                  "': next_id does not exceed region id " +
                  std::to_string(label));
    }
  }
}

bool same_partition(std::span<const RegionId> a, std::span<const RegionId> b) {
  if (a.size() != b.size()) return false;
  std::unordered_map<RegionId, RegionId> forward;
  std::unordered_map<RegionId, RegionId> backward;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto [f, f_new] = forward.try_emplace(a[i], b[i]);
    const auto [r, r_new] = backward.try_emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

std::pair<std::vector<Vec3>, Transform> normalize_unit_sphere(
    std::span<const Vec3> points) {
  if (points.empty()) throw Error("empty point set");
  Transform t;
  t.center = centroid(points);
  double max_r2 = 0.0;
  for (const auto& p : points) {
    max_r2 = std::max(max_r2, squared_distance(p, t.center));
  }
  const double r = std::sqrt(max_r2);
  t.scale = r > 0.0 ? r : 1.0;
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(t.apply(p));
  return {std::move(out), t};
}

NormalizedRegion normalize_region(const Shape& shape,
                                  std::vector<std::size_t> point_indices) {
  std::vector<Vec3> raw;
  raw.reserve(point_indices.size());
  NormalizedRegion region;
  region.normals.reserve(point_indices.size());
  for (auto i : point_indices) {
    raw.push_back(shape.positions()[i]);
    region.normals.push_back(shape.normals()[i]);
  }
  auto [positions, transform] = normalize_unit_sphere(raw);
  region.point_indices = std::move(point_indices);
  region.positions = std::move(positions);
  region.transform = transform;
  return region;
}

std::vector<std::size_t> subsample_points(std::span<const std::size_t> indices,
                                          std::size_t target, Rng& rng) {
  if (indices.empty()) throw Error("cannot subsample an empty index set");
  if (target == 0) throw Error("subsample target must be at least 1");
  std::vector<std::size_t> pool(indices.begin(), indices.end());
  if (pool.size() >= target) {
    // Partial Fisher-Yates: the first `target` slots form the sample.
    for (std::size_t i = 0; i < target; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(target);
    return pool;
  }
  std::uniform_int_distribution<std::size_t> pick(0, indices.size() - 1);
  while (pool.size() < target) pool.push_back(indices[pick(rng)]);
  return pool;
}

double min_region_distance(const Shape& shape,
                           const RegionDecomposition& decomp, RegionId a,
                           RegionId b) {
  auto pa = decomp.members_of(a);
  auto pb = decomp.members_of(b);
  if (pa.empty()) throw Error("unknown region id " + std::to_string(a));
  if (pb.empty()) throw Error("unknown region id " + std::to_string(b));
  if (a == b) return 0.0;
  if (pa.size() > pb.size()) std::swap(pa, pb);
  const KdTree tree(shape.positions(), pa);
  double best = std::numeric_limits<double>::infinity();
  for (auto i : pb) {
    best = std::min(best, tree.nearest(shape.positions()[i]).dist2);
  }
  return std::sqrt(best);
}

}  // namespace shred
