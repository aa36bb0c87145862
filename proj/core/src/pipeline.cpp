#include "shred/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "shred/decomp.hpp"
#include "shred/error.hpp"
#include "shred/kdtree.hpp"
#include "shred/metrics.hpp"

namespace shred {
namespace {

constexpr auto kNoRegion = std::numeric_limits<RegionId>::max();

template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const ScoreFileError& e) {
    throw ScoreFileError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(context + ": " + e.what());
  }
}

std::vector<std::size_t> merged_members(const std::vector<std::size_t>& a,
                                        const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Per-point value lookup for a group of request points: exact hit for
// sampled points (first occurrence wins), nearest sample otherwise.
template <typename T>
class SampleLookup {
 public:
  SampleLookup(const Shape& shape, std::span<const std::size_t> indices,
               std::span<const T> values)
      : positions_(shape.positions()) {
    std::vector<std::size_t> unique;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (values_.emplace(indices[k], values[k]).second) {
        unique.push_back(indices[k]);
      }
    }
    tree_ = KdTree(positions_, unique);
  }

  T at(std::size_t point) const {
    const auto it = values_.find(point);
    if (it != values_.end()) return it->second;
    return values_.at(tree_.nearest(positions_[point]).index);
  }

 private:
  std::span<const Vec3> positions_;
  std::unordered_map<std::size_t, T> values_;
  KdTree tree_;
};

std::optional<double> purity_of(const Shape& shape,
                                const RegionDecomposition& decomp) {
  if (!shape.has_gt()) return std::nullopt;
  return region_purity(decomp.labels(), shape.gt_labels());
}

}  // namespace

void PipelineConfig::validate() const {
  if (fps_k < 1) throw Error("fps_k must be at least 1");
  if (!(merge_threshold >= 0.0 && merge_threshold <= 1.0)) {
    throw Error("merge_threshold must lie in [0, 1]");
  }
  if (!(fix_radius >= 0.0) || !(merge_outside_radius >= 0.0) ||
      !(adjacency_threshold >= 0.0)) {
    throw Error("radii and adjacency threshold must be non-negative");
  }
}

Rng stage_rng(std::uint64_t seed, std::string_view stage) {
  std::uint32_t tag = 2166136261U;
  for (char c : stage) {
    tag ^= static_cast<unsigned char>(c);
    tag *= 16777619U;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), tag};
  return Rng(seq);
}

RegionDecomposition run_split_stage(const Shape& shape,
                                    const RegionDecomposition& decomp,
                                    SplitOperator& op, Rng& rng) {
  decomp.validate(shape.size());
  RegionDecomposition out(decomp.shape_id(),
                          std::vector<RegionId>(decomp.labels().begin(),
                                                decomp.labels().end()),
                          decomp.next_id());
  for (const auto& [region, members] : decomp.members()) {
    const auto context = "split stage, region " + std::to_string(region);
    const auto request = make_split_request(shape, region, members, rng);
    const auto response = with_context(context, [&] { return op.split(request); });
    const auto& sampled = request.points.point_indices;
    if (response.slots.size() != sampled.size()) {
      throw Error(context + ": expected " + std::to_string(sampled.size()) +
                  " slot labels, got " + std::to_string(response.slots.size()));
    }
    for (auto s : response.slots) {
      if (s >= kSplitSlots) {
        throw Error(context + ": slot label " + std::to_string(s) +
                    " out of range");
      }
    }

    const SampleLookup<std::uint8_t> lookup(
        shape, sampled, std::span<const std::uint8_t>(response.slots));
    std::vector<std::uint8_t> slot(members.size());
    std::array<bool, kSplitSlots> used{};
    for (std::size_t m = 0; m < members.size(); ++m) {
      slot[m] = lookup.at(members[m]);
      used[slot[m]] = true;
    }
    std::array<RegionId, kSplitSlots> fresh{};
    for (std::size_t s = 0; s < kSplitSlots; ++s) {
      fresh[s] = used[s] ? out.fresh_id() : kNoRegion;
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      out.assign(members[m], fresh[slot[m]]);
    }
  }
  out.validate(shape.size());
  return out;
}

RegionDecomposition run_fix_stage(const Shape& shape,
                                  const RegionDecomposition& decomp,
                                  FixOperator& op, const PipelineConfig& config,
                                  Rng& rng, std::vector<std::string>* warnings) {
  decomp.validate(shape.size());
  const auto labels = decomp.labels();
  const KdTree tree(shape.positions());

  // Streaming argmax with the keep-prior tie rule.
  const std::size_t n = shape.size();
  std::vector<float> best(n, -std::numeric_limits<float>::infinity());
  std::vector<RegionId> best_region(n, kNoRegion);
  std::vector<char> prior_tied(n, 0);
  auto offer = [&](std::size_t point, RegionId region, float score) {
    if (score > best[point]) {
      best[point] = score;
      best_region[point] = region;
      prior_tied[point] = region == labels[point];
    } else if (score == best[point]) {
      best_region[point] = std::min(best_region[point], region);
      if (region == labels[point]) prior_tied[point] = 1;
    }
  };

  for (const auto& [region, members] : decomp.members()) {
    const auto context = "fix stage, region " + std::to_string(region);
    const auto nb = region_neighborhood(shape, tree, labels, members, region,
                                        region, config.fix_radius);
    const auto request = make_fix_request(shape, region, members, nb, rng);
    if (request.boundary_fallback && warnings) {
      warnings->push_back(context +
                          ": no outside points in range, used boundary points");
    }
    const auto response = with_context(context, [&] { return op.fix(request); });
    const auto& sampled = request.points.point_indices;
    if (response.inside_prob.size() != sampled.size()) {
      throw Error(context + ": expected " + std::to_string(sampled.size()) +
                  " probabilities, got " +
                  std::to_string(response.inside_prob.size()));
    }
    for (auto p : response.inside_prob) {
      if (!(p >= 0.0f && p <= 1.0f)) {
        throw Error(context + ": probability outside [0, 1]");
      }
    }
    const std::span<const std::size_t> all(sampled);
    const std::span<const float> probs(response.inside_prob);
    const SampleLookup<float> inside(shape, all.first(kFixInsidePoints),
                                     probs.first(kFixInsidePoints));
    for (auto m : members) offer(m, region, inside.at(m));
    if (!request.boundary_fallback) {
      const SampleLookup<float> outside(shape, all.subspan(kFixInsidePoints),
                                        probs.subspan(kFixInsidePoints));
      for (auto o : nb.outside) offer(o, region, outside.at(o));
    }
  }

  RegionDecomposition out(decomp.shape_id(),
                          std::vector<RegionId>(labels.begin(), labels.end()),
                          decomp.next_id());
  for (std::size_t i = 0; i < n; ++i) {
    out.assign(i, prior_tied[i] ? labels[i] : best_region[i]);
  }
  out.validate(shape.size());
  return out;
}

RegionDecomposition run_merge_stage(const Shape& shape,
                                    const RegionDecomposition& decomp,
                                    MergeOperator& op,
                                    const PipelineConfig& config, Rng& rng,
                                    MergeStats* stats,
                                    std::vector<std::string>* warnings) {
  decomp.validate(shape.size());
  RegionDecomposition out = decomp;
  auto members = decomp.members();
  auto pairs = adjacency(shape, decomp, config.adjacency_threshold).pairs;
  const KdTree tree(shape.positions());
  std::set<RegionPair> scored;
  MergeStats local;

  while (true) {
    std::vector<std::pair<double, RegionPair>> candidates;
    for (const auto& pair : pairs) {
      if (scored.contains(pair)) continue;
      const auto& [a, b] = pair;
      const auto context = "merge stage, regions " + std::to_string(a) + "/" +
                           std::to_string(b);
      const auto both = merged_members(members.at(a), members.at(b));
      const auto nb = region_neighborhood(shape, tree, out.labels(), both, a, b,
                                          config.merge_outside_radius);
      const auto request =
          make_merge_request(shape, a, b, members.at(a), members.at(b), nb, rng);
      if (request.boundary_fallback && warnings) {
        warnings->push_back(context +
                            ": no outside points in range, used boundary points");
      }
      const auto response =
          with_context(context, [&] { return op.merge(request); });
      if (!std::isfinite(response.probability)) {
        throw Error(context + ": non-finite merge probability");
      }
      ++local.queries;
      scored.insert(pair);
      candidates.emplace_back(response.probability, pair);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });

    std::set<RegionId> merged_this_round;
    std::size_t merges = 0;
    for (const auto& [probability, pair] : candidates) {
      const auto [a, b] = pair;
      if (!(probability > config.merge_threshold)) break;
      if (merged_this_round.contains(a) || merged_this_round.contains(b)) {
        continue;
      }
      const RegionId c = out.fresh_id();
      auto joined = merged_members(members.at(a), members.at(b));
      for (auto i : joined) out.assign(i, c);
      members.erase(a);
      members.erase(b);
      members.emplace(c, std::move(joined));
      merged_this_round.insert(a);
      merged_this_round.insert(b);

      std::set<RegionPair> contracted;
      for (auto [x, y] : pairs) {
        if (x == a || x == b) x = c;
        if (y == a || y == b) y = c;
        if (x != y) contracted.insert(make_pair_ordered(x, y));
      }
      pairs = std::move(contracted);
      ++merges;
    }
    if (merges == 0) break;
    ++local.rounds;
    local.merges += merges;
  }
  out.validate(shape.size());
  if (stats) *stats = local;
  return out;
}

PipelineResult run_until_merge(const Shape& shape, const OperatorSet& ops,
                               const PipelineConfig& config) {
  config.validate();
  PipelineResult result;
  auto& trace = result.trace;
  result.decomposition = fps_cluster(shape, config.fps_k, config.seed);
  trace.stages.push_back({"fps", result.decomposition.region_count(),
                          purity_of(shape, result.decomposition)});
  if (config.enable_split) {
    if (!ops.split) throw Error("split stage enabled without a split operator");
    auto rng = stage_rng(config.seed, "split");
    result.decomposition =
        run_split_stage(shape, result.decomposition, *ops.split, rng);
    trace.stages.push_back({"split", result.decomposition.region_count(),
                            purity_of(shape, result.decomposition)});
  }
  if (config.enable_fix) {
    if (!ops.fix) throw Error("fix stage enabled without a fix operator");
    auto rng = stage_rng(config.seed, "fix");
    result.decomposition = run_fix_stage(shape, result.decomposition, *ops.fix,
                                         config, rng, &trace.warnings);
    trace.stages.push_back({"fix", result.decomposition.region_count(),
                            purity_of(shape, result.decomposition)});
  }
  return result;
}

PipelineResult finish_with_merge(const Shape& shape, PipelineResult partial,
                                 MergeOperator& op,
                                 const PipelineConfig& config) {
  auto rng = stage_rng(config.seed, "merge");
  MergeStats stats;
  partial.decomposition = run_merge_stage(shape, partial.decomposition, op,
                                          config, rng, &stats,
                                          &partial.trace.warnings);
  partial.trace.merge_rounds = stats.rounds;
  partial.trace.stages.push_back({"merge", partial.decomposition.region_count(),
                                  purity_of(shape, partial.decomposition)});
  return partial;
}

PipelineResult run_pipeline(const Shape& shape, const OperatorSet& ops,
                            const PipelineConfig& config) {
  auto result = run_until_merge(shape, ops, config);
  if (!config.enable_merge) return result;
  if (!ops.merge) throw Error("merge stage enabled without a merge operator");
  return finish_with_merge(shape, std::move(result), *ops.merge, config);
}

}  // namespace shred
