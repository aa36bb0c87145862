#include "shred/sweep.hpp"

#include <cmath>
#include <sstream>

#include "shred/error.hpp"
#include "shred/metrics.hpp"

namespace shred {

std::vector<double> threshold_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) {
    throw Error("threshold grid needs step > 0 and stop >= start");
  }
  const auto count =
      static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Round to 12 decimals so 0.01 * 7 prints as 0.07.
    const double v = start + static_cast<double>(i) * step;
    grid.push_back(std::round(v * 1e12) / 1e12);
  }
  return grid;
}

std::vector<double> parse_threshold_grid(const std::string& spec) {
  std::istringstream in(spec);
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  char c1 = 0;
  char c2 = 0;
  in >> start >> c1 >> stop >> c2 >> step;
  if (!in || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
    throw Error("grid must look like start:stop:step, got '" + spec + "'");
  }
  return threshold_grid(start, stop, step);
}

std::vector<SweepRow> sweep_thresholds(const Shape& shape, const OperatorSet& ops,
                                       const MergeOperatorFactory& merge_factory,
                                       const PipelineConfig& config,
                                       std::span<const double> thresholds) {
  if (!shape.has_gt()) {
    throw Error("sweep of '" + shape.id() + "' needs ground truth for purity");
  }
  const auto cached = run_until_merge(shape, ops, config);
  std::vector<SweepRow> rows;
  rows.reserve(thresholds.size());
  for (const double t : thresholds) {
    PipelineConfig run = config;
    run.merge_threshold = t;
    run.validate();
    auto decomp = cached.decomposition;
    if (config.enable_merge) {
      const auto op = merge_factory();
      if (!op) throw Error("sweep needs a merge operator");
      auto rng = stage_rng(config.seed, "merge");
      decomp = run_merge_stage(shape, decomp, *op, run, rng);
    }
    rows.push_back({t, decomp.region_count(),
                    region_purity(decomp.labels(), shape.gt_labels())});
  }
  return rows;
}

std::vector<SweepRow> sweep_thresholds(const Shape& shape, const OperatorSet& ops,
                                       const PipelineConfig& config,
                                       std::span<const double> thresholds) {
  return sweep_thresholds(
      shape, ops, [&] { return ops.merge; }, config, thresholds);
}

}  // namespace shred
