#include "shred/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "shred/error.hpp"
#include "shred/kdtree.hpp"

namespace shred {
namespace {

struct Box {
  Vec3 lo;
  Vec3 hi;
};

double axis(const Vec3& v, int a) { return a == 0 ? v.x : (a == 1 ? v.y : v.z); }
void set_axis(Vec3& v, int a, double x) { (a == 0 ? v.x : (a == 1 ? v.y : v.z)) = x; }

bool interiors_overlap(const Box& a, const Box& b) {
  constexpr double kEps = 1e-9;
  for (int d = 0; d < 3; ++d) {
    if (std::min(axis(a.hi, d), axis(b.hi, d)) - std::max(axis(a.lo, d), axis(b.lo, d)) <= kEps) {
      return false;
    }
  }
  return true;
}

bool inside_closed(const Box& b, const Vec3& p) {
  constexpr double kEps = 1e-9;
  for (int d = 0; d < 3; ++d) {
    if (axis(p, d) < axis(b.lo, d) - kEps || axis(p, d) > axis(b.hi, d) + kEps) return false;
  }
  return true;
}

// Rods and plates: one long side, the others short, axes shuffled.
Vec3 draw_dims(Rng& rng) {
  std::uniform_real_distribution<double> longer(0.4, 1.0);
  std::uniform_real_distribution<double> shorter(0.06, 0.3);
  std::array<double, 3> d{longer(rng), shorter(rng), shorter(rng)};
  std::shuffle(d.begin(), d.end(), rng);
  return {d[0], d[1], d[2]};
}

std::vector<Box> draw_boxes(std::size_t count, Rng& rng) {
  std::vector<Box> boxes;
  const Vec3 d0 = draw_dims(rng);
  boxes.push_back({{0, 0, 0}, d0});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t tries = 0;
  while (boxes.size() < count && tries++ < 2000) {
    const Box& parent =
        boxes[std::uniform_int_distribution<std::size_t>(0, boxes.size() - 1)(rng)];
    const int face_axis = std::uniform_int_distribution<int>(0, 2)(rng);
    const bool positive = unit(rng) < 0.5;
    const Vec3 dims = draw_dims(rng);
    Box child;
    for (int d = 0; d < 3; ++d) {
      const double size = axis(dims, d);
      double lo;
      if (d == face_axis) {
        lo = positive ? axis(parent.hi, d) : axis(parent.lo, d) - size;
      } else {
        // Child overlaps the parent face by at least a third of the smaller extent.
        const double plo = axis(parent.lo, d);
        const double phi = axis(parent.hi, d);
        const double margin = std::min(size, phi - plo) / 3.0;
        lo = plo + margin - size + unit(rng) * (phi - plo - 2 * margin + size);
        lo = std::clamp(lo, plo - size + margin, phi - margin);
      }
      set_axis(child.lo, d, lo);
      set_axis(child.hi, d, lo + size);
    }
    bool clear = true;
    for (const auto& b : boxes) clear = clear && !interiors_overlap(b, child);
    if (clear) boxes.push_back(child);
  }
  return boxes;
}

struct Sample {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<std::int64_t> labels;
};

Sample sample_boxes(const std::vector<Box>& boxes, double pitch, double jitter,
                    Rng& rng) {
  Sample s;
  std::uniform_real_distribution<double> wobble(-jitter * pitch, jitter * pitch);
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const Box& box = boxes[b];
    for (int fa = 0; fa < 3; ++fa) {
      const int ua = (fa + 1) % 3;
      const int va = (fa + 2) % 3;
      const double ulen = axis(box.hi, ua) - axis(box.lo, ua);
      const double vlen = axis(box.hi, va) - axis(box.lo, va);
      const auto nu = static_cast<int>(std::ceil(ulen / pitch));
      const auto nv = static_cast<int>(std::ceil(vlen / pitch));
      for (int side = 0; side < 2; ++side) {
        Vec3 normal;
        set_axis(normal, fa, side ? 1.0 : -1.0);
        const double w = side ? axis(box.hi, fa) : axis(box.lo, fa);
        for (int i = 0; i < nu; ++i) {
          for (int j = 0; j < nv; ++j) {
            Vec3 p;
            set_axis(p, fa, w);
            const double u = axis(box.lo, ua) + (i + 0.5) * ulen / nu + wobble(rng);
            const double v = axis(box.lo, va) + (j + 0.5) * vlen / nv + wobble(rng);
            set_axis(p, ua, std::clamp(u, axis(box.lo, ua), axis(box.hi, ua)));
            set_axis(p, va, std::clamp(v, axis(box.lo, va), axis(box.hi, va)));
            bool hidden = false;
            for (std::size_t o = 0; o < boxes.size() && !hidden; ++o) {
              hidden = o != b && inside_closed(boxes[o], p);
            }
            if (hidden) continue;
            s.positions.push_back(p);
            s.normals.push_back(normal);
            s.labels.push_back(static_cast<std::int64_t>(b));
          }
        }
      }
    }
  }
  return s;
}

}  // namespace

std::size_t component_count(const Shape& shape, std::span<const std::size_t> subset,
                            double eps) {
  std::vector<std::size_t> ids(subset.begin(), subset.end());
  if (ids.empty()) {
    ids.resize(shape.size());
    std::iota(ids.begin(), ids.end(), 0);
  }
  const auto pos = shape.positions();
  const KdTree tree(pos, ids);
  std::vector<std::size_t> slot(shape.size(), 0);
  for (std::size_t k = 0; k < ids.size(); ++k) slot[ids[k]] = k;
  std::vector<std::size_t> parent(ids.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = ids.size();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    for (auto j : tree.radius(pos[ids[k]], eps)) {
      const auto a = find(k);
      const auto b = find(slot[j]);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components;
}

bool fixture_is_well_formed(const Shape& shape, const BoxFixtureOptions& options) {
  if (!shape.has_gt()) return false;
  if (shape.size() < options.min_points || shape.size() > options.max_points) return false;
  if (shape.gt_part_count() < options.min_parts || shape.gt_part_count() > options.max_parts) {
    return false;
  }
  std::vector<std::vector<std::size_t>> parts(shape.gt_part_count());
  const auto gt = shape.gt_labels();
  for (std::size_t i = 0; i < shape.size(); ++i) parts[gt[i]].push_back(i);
  for (const auto& p : parts) {
    if (component_count(shape, p, options.connectivity_eps) != 1) return false;
  }
  return component_count(shape, {}, options.connectivity_eps) == 1;
}

Shape make_box_assembly(std::uint64_t seed, const BoxFixtureOptions& options) {
  for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    Rng rng(seq);
    const auto count = std::uniform_int_distribution<std::size_t>(
        options.min_parts, options.max_parts)(rng);
    const auto boxes = draw_boxes(count, rng);
    if (boxes.size() != count) continue;

    // A coarse pass fixes the normalization radius, then the real pitch.
    const auto coarse = sample_boxes(boxes, 0.05, 0.0, rng);
    const double radius = normalize_unit_sphere(coarse.positions).second.scale;
    auto fine = sample_boxes(boxes, options.spacing * radius, options.jitter, rng);
    if (fine.positions.size() < options.min_points ||
        fine.positions.size() > options.max_points) {
      continue;
    }
    Shape raw("box-" + std::to_string(seed), std::move(fine.positions),
              std::move(fine.normals), std::move(fine.labels));
    Shape shape = normalized_copy(raw);
    if (fixture_is_well_formed(shape, options)) return shape;
  }
  throw Error("could not build a well-formed box assembly for seed " + std::to_string(seed));
}

}  // namespace shred
