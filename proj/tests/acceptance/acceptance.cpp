// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "shred/decomp.hpp"
#include "shred/fixtures.hpp"
#include "shred/heuristic.hpp"
#include "shred/matching.hpp"
#include "shred/metrics.hpp"
#include "shred/oracle.hpp"
#include "shred/pipeline.hpp"
#include "shred/pipeline_io.hpp"
#include "shred/score_file.hpp"
#include "shred/synthgen.hpp"
#include "support/brute.hpp"

namespace fs = std::filesystem;
using namespace shred;

namespace {

constexpr std::size_t kFixtureCount = 20;

const std::vector<Shape>& fixtures() {
  static const std::vector<Shape> shapes = [] {
    std::vector<Shape> out;
    for (std::uint64_t s = 0; s < kFixtureCount; ++s) out.push_back(make_box_assembly(s));
    return out;
  }();
  return shapes;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* name, const Verdict& v) {
  std::printf("%s %s %s: %s\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
  std::fflush(stdout);
  failures += !v.pass;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t union_find_components(const std::set<RegionId>& regions,
                                  const std::set<std::pair<RegionId, RegionId>>& edges) {
  std::map<RegionId, RegionId> parent;
  for (auto r : regions) parent[r] = r;
  std::function<RegionId(RegionId)> find = [&](RegionId x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& [a, b] : edges) parent[find(a)] = find(b);
  std::set<RegionId> roots;
  for (auto r : regions) roots.insert(find(r));
  return roots.size();
}

// A1 -------------------------------------------------------------------------

Verdict oracle_exactness() {
  Verdict v;
  double worst_purity = 1.0;
  std::size_t exact_counts = 0, well_formed = 0;
  std::size_t min_n = SIZE_MAX, max_n = 0, min_g = SIZE_MAX, max_g = 0;
  double elapsed = 0.0;
  PipelineConfig config;
  config.merge_threshold = 0.5;
  for (const auto& shape : fixtures()) {
    well_formed += fixture_is_well_formed(shape, BoxFixtureOptions{});
    min_n = std::min(min_n, shape.size());
    max_n = std::max(max_n, shape.size());
    min_g = std::min(min_g, shape.gt_part_count());
    max_g = std::max(max_g, shape.gt_part_count());
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_pipeline(shape, oracle_operators(shape), config);
    elapsed += seconds_since(t0);
    const double p = region_purity(result.decomposition.labels(), shape.gt_labels());
    worst_purity = std::min(worst_purity, p);
    exact_counts += result.decomposition.region_count() == shape.gt_part_count();
  }
  v.pass = worst_purity == 1.0 && exact_counts == kFixtureCount &&
           well_formed == kFixtureCount && elapsed < 60.0;
  v.detail = fmt("%zu fixtures (%zu well-formed, %zu-%zu parts, %zu-%zu points), "
                 "min purity %.17g, |R|=|R*| on %zu, pipeline time %.2f s",
                 kFixtureCount, well_formed, min_g, max_g, min_n, max_n, worst_purity,
                 exact_counts, elapsed);
  return v;
}

// A2 -------------------------------------------------------------------------

Verdict threshold_endpoints() {
  Verdict v;
  std::size_t unchanged = 0, component_match = 0, cases = 0;
  for (std::size_t f = 0; f < 5; ++f) {
    const auto& shape = fixtures()[f];
    PipelineConfig config;
    config.seed = f;
    // One oracle and one heuristic-split run give two different fix outputs.
    for (int variant = 0; variant < 2; ++variant) {
      auto ops = oracle_operators(shape);
      if (variant == 1) ops.split = std::make_shared<HeuristicSplit>();
      const auto fixed = run_until_merge(shape, ops, config).decomposition;
      ++cases;

      ConstantMerge always(1.0f);
      PipelineConfig hi = config;
      hi.merge_threshold = 1.0;
      Rng rng1 = stage_rng(config.seed, "merge");
      unchanged += run_merge_stage(shape, fixed, always, hi, rng1) == fixed;

      PipelineConfig lo = config;
      lo.merge_threshold = 0.0;
      Rng rng0 = stage_rng(config.seed, "merge");
      const auto merged = run_merge_stage(shape, fixed, always, lo, rng0);
      const auto ids = fixed.region_ids();
      const auto edges =
          testing::brute_adjacency(shape.positions(), fixed.labels(), lo.adjacency_threshold);
      const auto expected = union_find_components({ids.begin(), ids.end()}, edges);
      component_match += merged.region_count() == expected;
    }
  }
  v.pass = unchanged == cases && component_match == cases;
  v.detail = fmt("threshold 1.0 unchanged %zu/%zu, threshold 0 = brute-force components %zu/%zu",
                 unchanged, cases, component_match, cases);
  return v;
}

// A3 -------------------------------------------------------------------------

Verdict metric_oracles() {
  Verdict v;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  bool identity_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t parts = 2 + rng() % 9;
    const auto shape = testing::random_shape(1000, parts, 100 + trial);
    std::vector<RegionId> labels;
    if (trial % 2 == 0) {
      const auto d = fps_cluster(shape, 1 + rng() % 64, trial);
      labels.assign(d.labels().begin(), d.labels().end());
    } else {
      const std::size_t k = 1 + rng() % 40;
      for (std::size_t i = 0; i < shape.size(); ++i) labels.push_back(static_cast<RegionId>(rng() % k));
    }
    const auto gt = shape.gt_labels();
    const auto want = testing::brute_scores(labels, gt);
    worst = std::max({worst, std::abs(region_purity(labels, gt) - want.purity),
                      std::abs(aiou(labels, gt) - want.aiou)});
    const std::vector<RegionId> star(gt.begin(), gt.end());
    identity_ok = identity_ok && region_purity(star, gt) == 1.0 && aiou(star, gt) == 1.0;
  }
  v.pass = worst <= 1e-9 && identity_ok;
  v.detail = fmt("100 random decompositions of 1000-point shapes, max |diff| %.3g (tol 1e-9), "
                 "purity(R*,R*) = AIoU(R*,R*) = 1: %s",
                 worst, identity_ok ? "yes" : "no");
  return v;
}

// A4 -------------------------------------------------------------------------

Verdict matcher_equivalence() {
  Verdict v;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 2.0);
  double worst = 0.0;
  std::size_t instances = 0;
  for (std::size_t k = 1; k <= 6; ++k) {
    for (int trial = 0; trial < 40; ++trial, ++instances) {
      const std::size_t n = 5 + rng() % 60;
      std::vector<std::vector<double>> logits(n, std::vector<double>(k));
      std::vector<std::size_t> target(n);
      InstanceMatrix pred(n, k);
      for (std::size_t r = 0; r < n; ++r) {
        target[r] = rng() % k;
        for (std::size_t c = 0; c < k; ++c) pred(r, c) = logits[r][c] = noise(rng);
      }
      const double got = hungarian_assign(pred, InstanceMatrix::one_hot(target, k)).cost;
      worst = std::max(worst, std::abs(got - testing::brute_min_matching_cost(logits, target)));
    }
  }

  // Boundary fixtures: part A has `a` rows on slot 0 and `b` on slot 2,
  // part B has `c` rows on slot 2 and the rest on slot 1.
  constexpr std::size_t K = 10;
  std::size_t cases = 0, agree = 0, fired = 0;
  for (std::size_t a : {9, 10, 11, 12, 30}) {
    for (std::size_t b : {9, 10, 11, 12, 25}) {
      if (a <= b) continue;
      for (std::size_t c : {std::size_t{0}, b - 1, b}) {
        const std::size_t nb = 2 * c + 12;
        const std::size_t n = a + b + nb;
        InstanceMatrix logits(n, K);
        std::vector<std::size_t> gt(n, 0);
        for (std::size_t r = 0; r < n; ++r) {
          std::size_t slot;
          if (r < a) slot = 0;
          else if (r < a + b) slot = 2;
          else if (r < a + b + c) slot = 2;
          else slot = 1;
          logits(r, slot) = 5.0;
          if (r >= a + b) gt[r] = 1;
        }
        const bool expected = a > 10 && b > 10 && 2 * b > b + c;
        const bool got = !overseg_match(logits, InstanceMatrix::one_hot(gt, K)).accepted.empty();
        ++cases;
        agree += expected == got;
        fired += got;
      }
    }
  }
  v.pass = worst <= 1e-9 && agree == cases && fired > 0 && fired < cases;
  v.detail = fmt("%zu instances K<=6, max cost diff %.3g; overseg rule on %zu boundary cases: "
                 "%zu agree, %zu accepted",
                 instances, worst, cases, agree, fired);
  return v;
}

// A5 -------------------------------------------------------------------------

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Oracle merge scores with each answer inverted when a hash of the request
// falls below p. The same requests flip at every larger p.
class NoisyOracleMerge final : public MergeOperator {
 public:
  NoisyOracleMerge(const Shape& shape, double p, std::uint64_t seed)
      : shape_(shape), p_(p), seed_(seed) {}
  MergeResponse merge(const MergeRequest& request) override {
    auto out = oracle_merge(request, shape_);
    const auto h = splitmix(request_digest(request.points.point_indices) ^ seed_);
    if (static_cast<double>(h >> 11) * 0x1.0p-53 < p_) out.probability = 1.0f - out.probability;
    return out;
  }

 private:
  const Shape& shape_;
  double p_;
  std::uint64_t seed_;
};

Verdict degradation_monotonicity(const fs::path& scratch) {
  Verdict v;
  const std::vector<double> ps{0.0, 0.1, 0.3};
  std::vector<double> mean(ps.size(), 0.0);
  PipelineConfig config;
  for (const auto& shape : fixtures()) {
    const auto partial = run_until_merge(shape, oracle_operators(shape), config);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      // Write the noisy scores to a file, then run from the file alone.
      auto log = std::make_shared<ScoreLog>();
      RecordingMerge recorder(std::make_shared<NoisyOracleMerge>(shape, ps[k], 31337), log);
      finish_with_merge(shape, partial, recorder, config);
      const auto file = scratch / fmt("a5-%s-%zu.jsonl", shape.id().c_str(), k);
      log->save(file);
      ReplayMerge replay(ScoreBook::load(file), shape.id());
      const auto result = finish_with_merge(shape, partial, replay, config);
      mean[k] += aiou(result.decomposition.labels(), shape.gt_labels()) / kFixtureCount;
    }
  }
  v.pass = mean[0] > mean[1] && mean[1] > mean[2];
  v.detail = fmt("mean AIoU over %zu fixtures: p=0 %.4f, p=0.1 %.4f, p=0.3 %.4f",
                 kFixtureCount, mean[0], mean[1], mean[2]);
  return v;
}

// A6 -------------------------------------------------------------------------

Verdict synthgen_statistics() {
  Verdict v;
  constexpr std::size_t kDraws = 10000;
  std::array<double, 11> observed{};
  Rng rng(6);
  for (std::size_t i = 0; i < kDraws; ++i) observed[sample_subpart_count(rng, 10)] += 1;
  double z = 0.0;
  for (int k = 1; k <= 10; ++k) z += std::pow(0.5, k);
  double chi2 = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double e = kDraws * std::pow(0.5, k) / z;
    chi2 += (observed[k] - e) * (observed[k] - e) / e;
  }
  const double pvalue = boost::math::cdf(boost::math::complement(
      boost::math::chi_squared(9.0), chi2));

  MergeGenStats stats;
  MergeGenOptions merge_opts;
  merge_opts.build_points = false;
  for (std::size_t f = 0; f < kFixtureCount; ++f) {
    Rng r(1000 + f);
    for (int pass = 0; pass < 2; ++pass) stats += gen_merge_examples(fixtures()[f], r, [](MergeExample&&) {}, merge_opts);
  }
  const double pos_rate = double(stats.executed_positives) / double(stats.positives);
  const double neg_rate = double(stats.executed_negatives) / double(stats.negatives);

  // Gates recomputed here by direct counting.
  std::size_t made = 0, rejected = 0, gate_ok = 0;
  for (std::size_t f = 0; f < kFixtureCount; ++f) {
    Rng r(2000 + f);
    for (int i = 0; i < 25; ++i) {
      const auto ex = gen_fix_example(fixtures()[f], r);
      if (!ex) {
        ++rejected;
        continue;
      }
      ++made;
      std::size_t flagged = 0, inside = 0, both = 0;
      for (std::size_t k = 0; k < ex->flags.size(); ++k) {
        flagged += ex->flags[k];
        inside += ex->targets[k];
        both += ex->flags[k] && ex->targets[k];
      }
      gate_ok += flagged > 0 && inside > 0 && both >= 0.4 * flagged && both >= 0.4 * inside;
    }
  }
  v.pass = pvalue > 0.01 && std::abs(pos_rate - 0.75) <= 0.02 &&
           std::abs(neg_rate - 0.25) <= 0.02 && made > 0 && gate_ok == made;
  v.detail = fmt("K chi2 %.2f (df 9) p=%.3f; merge execution %.4f of %zu same-part, "
                 "%.4f of %zu cross-part; fix gates hold on %zu/%zu examples (%zu rejected)",
                 chi2, pvalue, pos_rate, stats.positives, neg_rate, stats.negatives, gate_ok,
                 made, rejected);
  return v;
}

// A7 -------------------------------------------------------------------------

Verdict determinism_and_replay(const fs::path& scratch) {
  Verdict v;
  std::size_t replay_same = 0, rerun_same = 0, cases = 0;
  for (std::size_t f = 0; f < 5; ++f) {
    const auto& shape = fixtures()[f];
    PipelineConfig config;
    config.seed = 40 + f;
    for (int variant = 0; variant < 2; ++variant) {
      ++cases;
      auto base = oracle_operators(shape);
      if (variant == 1) base.split = std::make_shared<HeuristicSplit>();
      auto log = std::make_shared<ScoreLog>();
      OperatorSet recording{std::make_shared<RecordingSplit>(base.split, log),
                            std::make_shared<RecordingFix>(base.fix, log),
                            std::make_shared<RecordingMerge>(base.merge, log)};
      const auto a = run_pipeline(shape, recording, config);
      const auto json_a = decomposition_to_json(a.decomposition, a.trace, config);
      const auto file = scratch / fmt("a7-%zu-%d.jsonl", f, variant);
      log->save(file);

      const auto book = ScoreBook::load(file);
      OperatorSet replay{std::make_shared<ReplaySplit>(book, shape.id()),
                         std::make_shared<ReplayFix>(book, shape.id()),
                         std::make_shared<ReplayMerge>(book, shape.id())};
      const auto b = run_pipeline(shape, replay, config);
      replay_same += decomposition_to_json(b.decomposition, b.trace, config) == json_a;

      const auto c = run_pipeline(shape, base, config);
      const auto d = run_pipeline(shape, base, config);
      rerun_same += decomposition_to_json(c.decomposition, c.trace, config) == json_a &&
                    decomposition_to_json(d.decomposition, d.trace, config) == json_a;
    }
  }
  v.pass = replay_same == cases && rerun_same == cases;
  v.detail = fmt("replay byte-identical %zu/%zu, same-seed reruns byte-identical %zu/%zu",
                 replay_same, cases, rerun_same, cases);
  return v;
}

// A8 -------------------------------------------------------------------------

// Split operator that answers with synthgen training targets for the request:
// GT slots from the oracle, re-expressed against engineered logits in which
// the largest part of the region is predicted as two confident halves.
class EngineeredTargetSplit final : public SplitOperator {
 public:
  EngineeredTargetSplit(const Shape& shape, TargetMatching mode) : shape_(shape), mode_(mode) {}

  SplitResponse split(const SplitRequest& request) override {
    const auto gt = oracle_split(request, shape_).slots;
    const std::size_t n = gt.size();
    std::array<std::size_t, kSplitSlots> count{};
    for (auto s : gt) ++count[s];
    const auto largest = static_cast<std::uint8_t>(
        std::max_element(count.begin(), count.end()) - count.begin());
    std::size_t spare = 0;
    while (spare < kSplitSlots && count[spare] > 0) ++spare;

    InstanceMatrix logits(n, kSplitSlots);
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) {
      if (gt[i] == largest) xs.push_back(request.points.positions[i].x);
    }
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    const double cut = xs[xs.size() / 2];
    for (std::size_t i = 0; i < n; ++i) {
      const bool upper = gt[i] == largest && spare < kSplitSlots &&
                         request.points.positions[i].x >= cut;
      logits(i, upper ? spare : gt[i]) = 5.0;
    }
    MatchResult detail;
    SplitResponse out{split_training_targets(gt, logits, mode_, &detail)};
    triggered += !detail.accepted.empty();
    distinct += std::set<std::uint8_t>(out.slots.begin(), out.slots.end()).size();
    ++requests;
    return out;
  }

  std::size_t triggered = 0, distinct = 0, requests = 0;

 private:
  const Shape& shape_;
  TargetMatching mode_;
};

Verdict ablation_direction() {
  Verdict v;
  std::size_t distinct_h = 0, distinct_o = 0, triggered = 0, requests = 0;
  std::size_t split_ok = 0, final_ok = 0, shapes = 0;
  double split_h = 0, split_o = 0, final_gap = 0;
  PipelineConfig config;
  config.fps_k = 8;  // large regions so the engineered halves exceed 10 points
  for (std::size_t f = 0; f < 10; ++f) {
    const auto& shape = fixtures()[f];
    const auto fps = fps_cluster(shape, config.fps_k, config.seed);
    auto run = [&](TargetMatching mode, double& split_purity, std::size_t& distinct,
                   std::size_t* trig) {
      auto op = std::make_shared<EngineeredTargetSplit>(shape, mode);
      Rng rng = stage_rng(config.seed, "split");
      const auto after_split = run_split_stage(shape, fps, *op, rng);
      split_purity = region_purity(after_split.labels(), shape.gt_labels());
      auto ops = oracle_operators(shape);
      ops.split = std::make_shared<EngineeredTargetSplit>(shape, mode);
      const auto full = run_pipeline(shape, ops, config);
      distinct += op->distinct;
      if (trig) {
        *trig += op->triggered;
        requests += op->requests;
      }
      return region_purity(full.decomposition.labels(), shape.gt_labels());
    };
    double ph = 0, po = 0;
    const double fh = run(TargetMatching::kHungarian, ph, distinct_h, nullptr);
    const double fo = run(TargetMatching::kOverseg, po, distinct_o, &triggered);
    ++shapes;
    split_ok += po >= ph;
    final_ok += fo >= fh;
    final_gap = std::max(final_gap, std::abs(fo - fh));
    split_h += ph / 10.0;
    split_o += po / 10.0;
  }
  // End-of-pipeline purity is reported but not gated: the extra regions change
  // which points the fix stage samples, so it moves by up to ~2e-3 either way.
  v.pass = triggered > 0 && distinct_h < distinct_o && split_ok == shapes;
  v.detail = fmt("over-seg accepted in %zu/%zu regions; distinct target slots %zu without vs %zu with; "
                 "mean split purity %.4f without vs %.4f with (>= on %zu/%zu); "
                 "after oracle fix+merge >= on %zu/%zu, max gap %.1e (not gated)",
                 triggered, requests, distinct_h, distinct_o, split_h, split_o, split_ok, shapes,
                 final_ok, shapes, final_gap);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments pick criteria by id, e.g. `shred_acceptance A5 A8`.
  const std::set<std::string> only(argv + 1, argv + argc);
  auto wanted = [&](const char* id) { return only.empty() || only.count(id) > 0; };
  std::string tag = "shred-acceptance";
  for (const auto& id : only) tag += "-" + id;
  const auto scratch = fs::temp_directory_path() / tag;
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  int ran = 0;
  try {
    fixtures();
    const std::vector<std::tuple<const char*, const char*, std::function<Verdict()>>> criteria{
        {"A1", "oracle exactness", oracle_exactness},
        {"A2", "threshold endpoints", threshold_endpoints},
        {"A3", "metric oracles", metric_oracles},
        {"A4", "matcher equivalence", matcher_equivalence},
        {"A5", "degradation monotonicity", [&] { return degradation_monotonicity(scratch); }},
        {"A6", "synthgen statistics", synthgen_statistics},
        {"A7", "determinism and replay", [&] { return determinism_and_replay(scratch); }},
        {"A8", "ablation direction", ablation_direction},
    };
    for (const auto& [id, name, check] : criteria) {
      if (!wanted(id)) continue;
      report(id, name, check());
      ++ran;
    }
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  fs::remove_all(scratch);
  std::printf("%d of %d criteria failed\n", failures, ran);
  return failures == 0 ? 0 : 1;
}
