#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shred/operators.hpp"
#include "shred/shape.hpp"

namespace shred {

struct PipelineConfig {
  std::size_t fps_k = 64;
  /// Added to a region's bounding radius when gathering fix context.
  double fix_radius = 0.1;
  /// Added to a region pair's bounding radius when gathering merge context.
  double merge_outside_radius = 0.1;
  /// A pair merges only when its probability is strictly greater.
  double merge_threshold = 0.5;
  /// Regions closer than this (minimum point distance) are neighbours.
  double adjacency_threshold = 0.025;
  std::uint64_t seed = 0;
  bool enable_split = true;
  bool enable_fix = true;
  bool enable_merge = true;

  /// Throws shred::Error on out-of-range values.
  void validate() const;
};

struct StageRecord {
  std::string stage;
  std::size_t regions = 0;
  std::optional<double> purity;
};

struct StageTrace {
  std::vector<StageRecord> stages;
  std::vector<std::string> warnings;
  std::size_t merge_rounds = 0;
};

struct MergeStats {
  std::size_t rounds = 0;  // rounds that merged at least one pair
  std::size_t queries = 0;
  std::size_t merges = 0;
};

struct PipelineResult {
  RegionDecomposition decomposition;
  StageTrace trace;
};

/// Independent generator for one stage, derived from the pipeline seed.
Rng stage_rng(std::uint64_t seed, std::string_view stage);

/// Splits every region with the operator's slot labels. Labels are spread
/// from the sampled points to the whole region by nearest sample, and each
/// non-empty slot becomes a fresh region.
RegionDecomposition run_split_stage(const Shape& shape,
                                    const RegionDecomposition& decomp,
                                    SplitOperator& op, Rng& rng);

/// Scores every region's neighbourhood and relabels each point with the
/// region of highest inside-probability. Ties keep the point's region when
/// it is among the tied, else go to the lowest region id.
RegionDecomposition run_fix_stage(const Shape& shape,
                                  const RegionDecomposition& decomp,
                                  FixOperator& op, const PipelineConfig& config,
                                  Rng& rng,
                                  std::vector<std::string>* warnings = nullptr);

/// Greedy merge rounds: score new neighbour pairs, sweep them by descending
/// probability and merge pairs above the threshold whose regions have not
/// merged yet this round. Stops after a round without merges.
RegionDecomposition run_merge_stage(const Shape& shape,
                                    const RegionDecomposition& decomp,
                                    MergeOperator& op,
                                    const PipelineConfig& config, Rng& rng,
                                    MergeStats* stats = nullptr,
                                    std::vector<std::string>* warnings = nullptr);

/// FPS followed by the enabled split and fix stages.
PipelineResult run_until_merge(const Shape& shape, const OperatorSet& ops,
                               const PipelineConfig& config);

/// Merge stage on top of a run_until_merge result, appending to its trace.
PipelineResult finish_with_merge(const Shape& shape, PipelineResult partial,
                                 MergeOperator& op, const PipelineConfig& config);

PipelineResult run_pipeline(const Shape& shape, const OperatorSet& ops,
                            const PipelineConfig& config);

}  // namespace shred
