#pragma once

// Slow reference implementations used as test oracles. Deliberately written
// as direct loops over the definitions, sharing no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "shred/shape.hpp"

namespace shred::testing {

inline double brute_min_distance(std::span<const Vec3> pos,
                                 const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (auto i : a) {
    for (auto j : b) {
      const double dx = pos[i].x - pos[j].x;
      const double dy = pos[i].y - pos[j].y;
      const double dz = pos[i].z - pos[j].z;
      best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
  }
  return best;
}

inline std::map<RegionId, std::vector<std::size_t>> brute_members(
    std::span<const RegionId> labels) {
  std::map<RegionId, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
  return out;
}

inline std::set<std::pair<RegionId, RegionId>> brute_adjacency(
    std::span<const Vec3> pos, std::span<const RegionId> labels, double threshold) {
  const auto members = brute_members(labels);
  std::set<std::pair<RegionId, RegionId>> out;
  for (auto a = members.begin(); a != members.end(); ++a) {
    for (auto b = std::next(a); b != members.end(); ++b) {
      if (brute_min_distance(pos, a->second, b->second) <= threshold) {
        out.insert({a->first, b->first});
      }
    }
  }
  return out;
}

// Region x part x point triple loop.
struct BruteScores {
  double purity = 0.0;
  double aiou = 0.0;
};

inline BruteScores brute_scores(std::span<const RegionId> regions,
                                std::span<const PartId> gt) {
  std::set<RegionId> region_set(regions.begin(), regions.end());
  std::set<PartId> part_set(gt.begin(), gt.end());
  const std::size_t n = regions.size();
  std::map<RegionId, PartId> assigned;
  std::map<PartId, double> best_iou;
  for (auto r : region_set) {
    double best = -1.0;
    for (auto p : part_set) {
      std::size_t inter = 0, uni = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool in_r = regions[i] == r;
        const bool in_p = gt[i] == p;
        inter += in_r && in_p;
        uni += in_r || in_p;
      }
      const double v = static_cast<double>(inter) / static_cast<double>(uni);
      if (v > best) {
        best = v;
        assigned[r] = p;
      }
      best_iou[p] = std::max(best_iou[p], v);
    }
  }
  BruteScores s;
  for (auto p : part_set) {
    std::size_t size = 0, kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (gt[i] != p) continue;
      ++size;
      kept += assigned[regions[i]] == p;
    }
    s.purity += static_cast<double>(kept) / static_cast<double>(size);
    s.aiou += best_iou[p];
  }
  s.purity /= static_cast<double>(part_set.size());
  s.aiou /= static_cast<double>(part_set.size());
  return s;
}

// Part with the largest count among `members`; lowest id on ties.
inline PartId brute_best_part(std::span<const PartId> gt,
                              const std::vector<std::size_t>& members) {
  PartId best = 0;
  std::size_t best_count = 0;
  std::set<PartId> parts;
  for (auto i : members) parts.insert(gt[i]);
  for (auto p : parts) {
    std::size_t c = 0;
    for (auto i : members) c += gt[i] == p;
    if (c > best_count) {
      best_count = c;
      best = p;
    }
  }
  return best;
}

// Minimum over all slot permutations of the summed cross-entropy between
// prediction slot sigma(t) and target column t, over target columns that
// have at least one row.
inline double brute_min_matching_cost(const std::vector<std::vector<double>>& logits,
                                      const std::vector<std::size_t>& target) {
  const std::size_t k = logits.front().size();
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t r = 0; r < logits.size(); ++r) {
    double z = 0.0;
    for (double v : logits[r]) z += std::exp(v);
    for (std::size_t p = 0; p < k; ++p) {
      cost[p][target[r]] += -std::log(std::exp(logits[r][p]) / z);
    }
  }
  std::set<std::size_t> used(target.begin(), target.end());
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (auto t : used) total += cost[perm[t]][t];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Random point cloud with random unit normals and `parts` GT labels.
inline Shape random_shape(std::size_t n, std::size_t parts, std::uint64_t seed,
                          const std::string& id = "random") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pos(n), nrm(n);
  std::vector<std::int64_t> gt(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = {u(rng), u(rng), u(rng)};
    nrm[i] = {u(rng), u(rng), u(rng) + 3.0};
    gt[i] = static_cast<std::int64_t>(i < parts ? i : rng() % parts);
  }
  return Shape(id, std::move(pos), std::move(nrm), std::move(gt));
}

// Shape whose points sit on a line at unit spacing, labeled by `gt`.
inline Shape line_shape(const std::vector<std::int64_t>& gt, double spacing = 1.0,
                        const std::string& id = "line") {
  std::vector<Vec3> pos, nrm;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    pos.push_back({spacing * static_cast<double>(i), 0.0, 0.0});
    nrm.push_back({0.0, 0.0, 1.0});
  }
  return Shape(id, std::move(pos), std::move(nrm), gt);
}

}  // namespace shred::testing
