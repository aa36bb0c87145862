#include "shred/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <set>
#include <tuple>

#include "shred/decomp.hpp"
#include "shred/error.hpp"
#include "shred/kdtree.hpp"
#include "shred/oracle.hpp"
#include "shred/pipeline.hpp"
#include "shred/requests.hpp"

namespace shred {
namespace {

void require_gt(const Shape& shape, const char* what) {
  if (!shape.has_gt()) throw Error(std::string(what) + " requires ground truth");
}

// The `count` candidates closest to `q` (ties to the lower index).
std::vector<std::size_t> closest_to(const Shape& shape,
                                    std::vector<std::size_t> candidates,
                                    const Vec3& q, std::size_t count) {
  const auto pos = shape.positions();
  count = std::min(count, candidates.size());
  auto key = [&](std::size_t i) { return std::pair(squared_distance(pos[i], q), i); };
  std::partial_sort(candidates.begin(), candidates.begin() + count, candidates.end(),
                    [&](auto a, auto b) { return key(a) < key(b); });
  candidates.resize(count);
  return candidates;
}

Vec3 jittered_center(const Shape& shape, std::span<const std::size_t> members,
                     Rng& rng) {
  const auto pos = shape.positions();
  Vec3 c;
  for (auto i : members) c += pos[i];
  c *= 1.0 / static_cast<double>(members.size());
  double r2 = 0.0;
  for (auto i : members) r2 = std::max(r2, squared_distance(pos[i], c));
  std::normal_distribution<double> noise(0.0, std::sqrt(r2) / 2.0);
  const double dx = noise(rng);
  const double dy = noise(rng);
  const double dz = noise(rng);
  return {c.x + dx, c.y + dy, c.z + dz};
}

std::vector<std::size_t> sorted_union(const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<SplitExample> gen_split_examples(const Shape& shape, std::size_t fps_k,
                                             std::uint64_t seed) {
  require_gt(shape, "split example generation");
  const auto decomp = fps_cluster(shape, fps_k, seed);
  Rng rng = stage_rng(seed, "split");
  std::vector<SplitExample> out;
  for (auto& [region, members] : decomp.members()) {
    const auto slots = largest_part_slots(shape, members);
    auto request = make_split_request(shape, region, members, rng);

    SplitExample ex;
    ex.shape_id = shape.id();
    ex.region = region;
    ex.features = split_features(request);
    std::array<int, kSplitSlots> dense;
    dense.fill(-1);
    std::vector<std::uint8_t> raw;
    for (auto i : request.points.point_indices) {
      const auto at = std::lower_bound(members.begin(), members.end(), i);
      raw.push_back(slots[static_cast<std::size_t>(at - members.begin())]);
    }
    // Keep the size ranking but close gaps left by unsampled small parts.
    std::array<bool, kSplitSlots> seen{};
    for (auto s : raw) seen[s] = true;
    int next = 0;
    for (std::size_t s = 0; s < kSplitSlots; ++s) {
      if (seen[s]) dense[s] = next++;
    }
    for (auto s : raw) ex.targets.push_back(static_cast<std::uint8_t>(dense[s]));
    ex.point_indices = std::move(request.points.point_indices);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::uint8_t> split_training_targets(
    std::span<const std::uint8_t> gt_slots, const InstanceMatrix& logits,
    TargetMatching mode, MatchResult* detail) {
  std::vector<std::size_t> labels(gt_slots.begin(), gt_slots.end());
  const auto target = InstanceMatrix::one_hot(labels, logits.cols());
  MatchResult match;
  if (mode == TargetMatching::kOverseg) {
    match = overseg_match(logits, target);
  } else {
    match = {hungarian_assign(logits, target).pred_to_target, target, {}};
  }
  std::vector<std::size_t> pred_of_target(logits.cols(), logits.cols());
  for (std::size_t p = 0; p < match.assignment.size(); ++p) {
    if (match.assignment[p]) pred_of_target[*match.assignment[p]] = p;
  }
  std::vector<std::uint8_t> out(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    std::size_t hot = 0;
    while (match.modified_target(r, hot) < 0.5) ++hot;
    out[r] = static_cast<std::uint8_t>(pred_of_target[hot]);
  }
  if (detail) *detail = std::move(match);
  return out;
}

RetentionFractions retention_fractions(std::span<const std::uint8_t> flags,
                                       std::span<const std::uint8_t> targets) {
  if (flags.size() != targets.size()) throw Error("flag/target length mismatch");
  std::size_t flagged = 0, targeted = 0, both = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    flagged += flags[i] != 0;
    targeted += targets[i] != 0;
    both += flags[i] != 0 && targets[i] != 0;
  }
  RetentionFractions f;
  if (flagged) f.flagged_kept = static_cast<double>(both) / static_cast<double>(flagged);
  if (targeted) f.target_kept = static_cast<double>(both) / static_cast<double>(targeted);
  return f;
}

bool passes_retention_gates(const RetentionFractions& f, double gate) {
  return f.flagged_kept >= gate && f.target_kept >= gate;
}

std::optional<FixExample> gen_fix_example(const Shape& shape, Rng& rng,
                                          const FixGenOptions& options) {
  require_gt(shape, "fix example generation");
  const auto gt = shape.gt_labels();
  const std::size_t n = shape.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto source = static_cast<PartId>(
      std::uniform_int_distribution<std::size_t>(0, shape.gt_part_count() - 1)(rng));
  std::vector<std::uint8_t> in_region(n, 0);
  for (std::size_t i = 0; i < n; ++i) in_region[i] = gt[i] == source;
  auto collect = [&](std::uint8_t value) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_region[i] == value) v.push_back(i);
    }
    return v;
  };

  if (unit(rng) < options.grow_probability) {
    const double y = options.grow_min + (options.grow_max - options.grow_min) * unit(rng);
    const auto inside = collect(1);
    const auto q = jittered_center(shape, inside, rng);
    const auto count = static_cast<std::size_t>(
        std::llround(y * static_cast<double>(inside.size())));
    for (auto i : closest_to(shape, collect(0), q, count)) in_region[i] = 1;
  }
  if (unit(rng) < options.shrink_probability) {
    const double x =
        options.shrink_min + (options.shrink_max - options.shrink_min) * unit(rng);
    auto inside = collect(1);
    const auto q = jittered_center(shape, inside, rng);
    auto count = static_cast<std::size_t>(
        std::llround(x * static_cast<double>(inside.size())));
    count = std::min(count, inside.size() - 1);
    for (auto i : closest_to(shape, std::move(inside), q, count)) in_region[i] = 0;
  }

  const auto inside = collect(1);
  const KdTree tree(shape.positions());
  std::vector<RegionId> labels(in_region.begin(), in_region.end());
  const auto nb = region_neighborhood(shape, tree, labels, inside, 1, 1,
                                      options.extension);

  auto inside_sample = subsample_points(inside, kFixInsidePoints, rng);
  std::vector<std::size_t> surplus_flipped;
  if (inside.size() > kFixInsidePoints) {
    std::vector<std::uint8_t> chosen(n, 0);
    for (auto i : inside_sample) chosen[i] = 1;
    for (auto i : inside) {
      if (!chosen[i] && unit(rng) < options.surplus_flip_probability) {
        surplus_flipped.push_back(i);
      }
    }
  }
  auto pool = sorted_union(nb.outside, surplus_flipped);
  if (pool.empty()) pool = boundary_points(shape, inside, nb.center);
  const auto outside_sample = subsample_points(pool, kFixOutsidePoints, rng);

  FixExample ex;
  ex.shape_id = shape.id();
  ex.source_part = source;
  ex.target_part = best_overlap_part(gt, inside);
  ex.point_indices = inside_sample;
  ex.point_indices.insert(ex.point_indices.end(), outside_sample.begin(),
                          outside_sample.end());
  ex.flags.assign(kFixPoints, 0);
  std::fill_n(ex.flags.begin(), kFixInsidePoints, 1);
  ex.flip_rate = options.flip_max * unit(rng);
  for (auto& f : ex.flags) {
    if (unit(rng) < ex.flip_rate) f ^= 1;
  }
  ex.targets.reserve(kFixPoints);
  for (auto i : ex.point_indices) ex.targets.push_back(gt[i] == ex.target_part);

  if (!passes_retention_gates(retention_fractions(ex.flags, ex.targets), options.gate)) {
    return std::nullopt;
  }

  FixRequest request;
  request.points = normalize_region(shape, ex.point_indices);
  request.inside_flags = ex.flags;
  ex.features = fix_features(request);
  return ex;
}

MergeGenStats& MergeGenStats::operator+=(const MergeGenStats& other) {
  fps_regions += other.fps_regions;
  initial_regions += other.initial_regions;
  for (std::size_t k = 0; k < subpart_histogram.size(); ++k) {
    subpart_histogram[k] += other.subpart_histogram[k];
  }
  positives += other.positives;
  negatives += other.negatives;
  executed_positives += other.executed_positives;
  executed_negatives += other.executed_negatives;
  return *this;
}

std::size_t sample_subpart_count(Rng& rng, std::size_t max_k) {
  if (max_k == 0) throw Error("subpart count bound must be positive");
  std::vector<double> weights;
  for (std::size_t k = 1; k <= max_k; ++k) weights.push_back(std::ldexp(1.0, -static_cast<int>(k)));
  std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
  return draw(rng) + 1;
}

RegionDecomposition synthetic_oversegmentation(const Shape& shape, Rng& rng,
                                               const MergeGenOptions& options,
                                               MergeGenStats* stats) {
  require_gt(shape, "merge example generation");
  if (options.region_counts.empty()) throw Error("no FPS region counts given");
  const auto gt = shape.gt_labels();
  const auto pos = shape.positions();
  const std::size_t m = options.region_counts[std::uniform_int_distribution<std::size_t>(
      0, options.region_counts.size() - 1)(rng)];
  const auto fps = fps_cluster(shape, m, rng());
  if (stats) stats->fps_regions += fps.region_count();

  // Group key: (fps region, mode, gt part or 0, index within K).
  using Key = std::tuple<RegionId, int, PartId, std::size_t>;
  std::map<Key, RegionId> group_ids;
  std::vector<RegionId> labels(shape.size(), 0);
  std::uniform_int_distribution<int> mode_draw(0, 2);

  for (const auto& [region, members] : fps.members()) {
    std::map<PartId, std::vector<std::size_t>> instances;
    for (auto i : members) instances[gt[i]].push_back(i);
    for (auto& [part, points] : instances) {
      const std::size_t k =
          sample_subpart_count(rng, std::min(options.max_subparts, points.size()));
      if (stats) ++stats->subpart_histogram[std::min<std::size_t>(k, 10)];
      // Voronoi seeds drawn from the instance's own points.
      std::vector<std::size_t> pool = points;
      for (std::size_t s = 0; s < k; ++s) {
        std::uniform_int_distribution<std::size_t> pick(s, pool.size() - 1);
        std::swap(pool[s], pool[pick(rng)]);
      }
      std::vector<std::size_t> seeds(pool.begin(), pool.begin() + static_cast<long>(k));
      const KdTree seed_tree(pos, seeds);

      std::vector<RegionId> subpart_group(k);
      for (std::size_t s = 0; s < k; ++s) {
        const int mode = mode_draw(rng);
        Key key{region, mode, 0, 0};
        if (mode >= 1) {
          std::get<3>(key) = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
        }
        if (mode == 2) std::get<2>(key) = part;
        auto [it, inserted] = group_ids.try_emplace(key, 0);
        if (inserted) it->second = static_cast<RegionId>(group_ids.size() - 1);
        subpart_group[s] = it->second;
      }
      for (auto i : points) {
        const auto nearest = seed_tree.nearest(pos[i]).index;
        const auto s = static_cast<std::size_t>(
            std::find(seeds.begin(), seeds.end(), nearest) - seeds.begin());
        labels[i] = subpart_group[s];
      }
    }
  }
  // Compact ids in order of first appearance so they are dense.
  std::map<RegionId, RegionId> compact;
  for (auto& l : labels) {
    auto [it, inserted] = compact.try_emplace(l, static_cast<RegionId>(compact.size()));
    l = it->second;
  }
  RegionDecomposition out(shape.id(), std::move(labels));
  if (stats) stats->initial_regions += out.region_count();
  return out;
}

MergeGenStats gen_merge_examples(const Shape& shape, Rng& rng,
                                 const MergeExampleSink& sink,
                                 const MergeGenOptions& options) {
  MergeGenStats stats;
  auto decomp = synthetic_oversegmentation(shape, rng, options, &stats);
  Rng request_rng(rng());
  const auto gt = shape.gt_labels();
  const KdTree tree(shape.positions());

  auto members = decomp.members();
  std::map<RegionId, std::set<RegionId>> neighbors;
  std::set<RegionPair> unvisited;
  for (const auto& [a, b] : adjacency(shape, decomp, options.adjacency_threshold).pairs) {
    neighbors[a].insert(b);
    neighbors[b].insert(a);
    unvisited.insert({a, b});
  }
  std::map<RegionId, PartId> best;
  auto best_of = [&](RegionId r) {
    auto it = best.find(r);
    if (it == best.end()) it = best.emplace(r, best_overlap_part(gt, members.at(r))).first;
    return it->second;
  };
  std::vector<RegionId> labels(decomp.labels().begin(), decomp.labels().end());
  RegionId next_id = decomp.next_id();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  while (!unvisited.empty()) {
    auto it = unvisited.begin();
    std::advance(it, static_cast<long>(std::uniform_int_distribution<std::size_t>(
                         0, unvisited.size() - 1)(rng)));
    const auto [a, b] = *it;
    unvisited.erase(it);

    MergeExample ex;
    ex.shape_id = shape.id();
    ex.first = a;
    ex.second = b;
    ex.first_part = best_of(a);
    ex.second_part = best_of(b);
    ex.label = ex.first_part == ex.second_part;
    if (options.build_points) {
      const auto both = sorted_union(members.at(a), members.at(b));
      const auto nb = region_neighborhood(shape, tree, labels, both, a, b,
                                          options.extension);
      auto request = make_merge_request(shape, a, b, members.at(a), members.at(b),
                                        nb, request_rng);
      ex.features = merge_features(request);
      ex.point_indices = std::move(request.points.point_indices);
    }
    ex.executed =
        unit(rng) < (ex.label ? options.execute_if_same : options.execute_if_different);
    (ex.label ? stats.positives : stats.negatives)++;
    if (ex.executed) (ex.label ? stats.executed_positives : stats.executed_negatives)++;

    if (ex.executed) {
      const RegionId merged = next_id++;
      auto joined = sorted_union(members.at(a), members.at(b));
      for (auto i : joined) labels[i] = merged;
      members.erase(a);
      members.erase(b);
      members.emplace(merged, std::move(joined));
      std::set<RegionId> around;
      for (auto r : {a, b}) {
        for (auto x : neighbors[r]) {
          if (x == a || x == b) continue;
          around.insert(x);
          neighbors[x].erase(r);
          unvisited.erase(make_pair_ordered(r, x));
        }
        neighbors.erase(r);
      }
      for (auto x : around) {
        neighbors[x].insert(merged);
        unvisited.insert(make_pair_ordered(x, merged));
      }
      neighbors[merged] = std::move(around);
    }
    sink(std::move(ex));
  }
  return stats;
}

std::vector<MergeExample> gen_merge_examples(const Shape& shape, Rng& rng,
                                             const MergeGenOptions& options,
                                             MergeGenStats* stats) {
  std::vector<MergeExample> out;
  const auto s = gen_merge_examples(
      shape, rng, [&](MergeExample&& ex) { out.push_back(std::move(ex)); }, options);
  if (stats) *stats += s;
  return out;
}

}  // namespace shred
