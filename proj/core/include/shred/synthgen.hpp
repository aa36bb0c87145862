#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shred/matching.hpp"
#include "shred/shape.hpp"

namespace shred {

// Split network training pairs.

struct SplitExample {
  std::string shape_id;
  RegionId region = 0;
  std::vector<std::size_t> point_indices;  // kSplitPoints entries
  std::vector<float> features;             // 6 per point
  std::vector<std::uint8_t> targets;       // GT slot per point, dense from 0
};

/// One example per FPS region; targets come from the largest-10 slot rule
/// evaluated over the full region.
std::vector<SplitExample> gen_split_examples(const Shape& shape, std::size_t fps_k,
                                             std::uint64_t seed);

enum class TargetMatching { kHungarian, kOverseg };

/// Re-expresses GT slot targets in the prediction's slot space. With
/// kOverseg, confident predicted splits of a single GT part are credited as
/// separate targets.
std::vector<std::uint8_t> split_training_targets(
    std::span<const std::uint8_t> gt_slots, const InstanceMatrix& logits,
    TargetMatching mode, MatchResult* detail = nullptr);

// Fix network training examples.

struct FixGenOptions {
  double grow_probability = 0.75;
  double grow_min = 0.05;
  double grow_max = 0.25;
  double shrink_probability = 0.75;
  double shrink_min = 0.10;
  double shrink_max = 0.50;
  double flip_max = 0.3;
  double surplus_flip_probability = 0.1;
  double extension = 0.1;
  double gate = 0.4;
};

struct FixExample {
  std::string shape_id;
  PartId source_part = 0;
  PartId target_part = 0;
  std::vector<std::size_t> point_indices;  // kFixPoints entries
  std::vector<std::uint8_t> flags;         // input inside flags after noise
  std::vector<std::uint8_t> targets;       // 1 if in the best-matching GT part
  std::vector<float> features;             // 7 per point
  double flip_rate = 0.0;
};

struct RetentionFractions {
  double flagged_kept = 0.0;   // flagged-inside points whose target is inside
  double target_kept = 0.0;    // target-inside points that are flagged inside
};

RetentionFractions retention_fractions(std::span<const std::uint8_t> flags,
                                       std::span<const std::uint8_t> targets);
bool passes_retention_gates(const RetentionFractions& f, double gate = 0.4);

/// One perturbed GT part, or nullopt when the retention gates reject it.
std::optional<FixExample> gen_fix_example(const Shape& shape, Rng& rng,
                                          const FixGenOptions& options = {});

// Merge network training examples.

struct MergeGenOptions {
  std::vector<std::size_t> region_counts{16, 32, 64, 128};
  std::size_t max_subparts = 10;
  double execute_if_same = 0.75;
  double execute_if_different = 0.25;
  double adjacency_threshold = 0.025;
  double extension = 0.1;
  bool build_points = true;  // false skips request assembly (statistics runs)
};

struct MergeExample {
  std::string shape_id;
  RegionId first = 0;
  RegionId second = 0;
  PartId first_part = 0;   // best-overlap GT part of each region
  PartId second_part = 0;
  bool label = false;
  bool executed = false;
  std::vector<std::size_t> point_indices;  // kMergePoints entries
  std::vector<float> features;             // 8 per point
};

struct MergeGenStats {
  std::size_t fps_regions = 0;
  std::size_t initial_regions = 0;
  std::array<std::size_t, 11> subpart_histogram{};  // index K
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t executed_positives = 0;
  std::size_t executed_negatives = 0;

  MergeGenStats& operator+=(const MergeGenStats& other);
};

/// Draws K in 1..max_k with P(K) proportional to 0.5^K.
std::size_t sample_subpart_count(Rng& rng, std::size_t max_k = 10);

/// Builds the synthetic over-segmentation of the shape (before any merges).
RegionDecomposition synthetic_oversegmentation(const Shape& shape, Rng& rng,
                                               const MergeGenOptions& options,
                                               MergeGenStats* stats = nullptr);

using MergeExampleSink = std::function<void(MergeExample&&)>;

MergeGenStats gen_merge_examples(const Shape& shape, Rng& rng,
                                 const MergeExampleSink& sink,
                                 const MergeGenOptions& options = {});

std::vector<MergeExample> gen_merge_examples(const Shape& shape, Rng& rng,
                                             const MergeGenOptions& options = {},
                                             MergeGenStats* stats = nullptr);

}  // namespace shred
