#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shred/pipeline.hpp"

namespace shred {

struct SweepRow {
  double threshold = 0.0;
  std::size_t regions = 0;
  double purity = 0.0;
};

/// Inclusive grid start, start+step, ..., stop. Values are computed from the
/// integer step count so no floating drift accumulates.
std::vector<double> threshold_grid(double start, double stop, double step);

/// Parses "start:stop:step".
std::vector<double> parse_threshold_grid(const std::string& spec);

/// Runs FPS, split and fix once, then the merge stage once per threshold
/// from that cached decomposition. Requires ground truth.
std::vector<SweepRow> sweep_thresholds(const Shape& shape, const OperatorSet& ops,
                                       const PipelineConfig& config,
                                       std::span<const double> thresholds);

/// Merge operator factory per threshold, for stateful operators (replay)
/// that must start fresh for every run.
using MergeOperatorFactory = std::function<std::shared_ptr<MergeOperator>()>;
std::vector<SweepRow> sweep_thresholds(const Shape& shape, const OperatorSet& ops,
                                       const MergeOperatorFactory& merge_factory,
                                       const PipelineConfig& config,
                                       std::span<const double> thresholds);

}  // namespace shred
