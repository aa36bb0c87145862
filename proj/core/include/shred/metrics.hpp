#pragma once

#include <span>
#include <string>
#include <vector>

#include "shred/shape.hpp"

namespace shred {

struct PartScore {
  PartId gt_id = 0;
  double best_iou = 0.0;
  double purity_fraction = 0.0;
};

struct EvalReport {
  std::string shape_id;
  std::size_t region_count = 0;
  double purity = 0.0;
  double aiou = 0.0;
  std::vector<PartScore> per_gt_part;
};

/// Region purity: every region is relabeled with its best-IoU ground-truth
/// part (ties to the lower part id); the score is the mean, over parts, of
/// the fraction of the part's points that carry its own label afterwards.
/// Throws on mismatched lengths.
double region_purity(std::span<const RegionId> regions,
                     std::span<const PartId> gt);

/// Mean over ground-truth parts of the best IoU achieved by any region.
double aiou(std::span<const RegionId> regions, std::span<const PartId> gt);

EvalReport evaluate(const std::string& shape_id,
                    std::span<const RegionId> regions,
                    std::span<const PartId> gt);
EvalReport evaluate(const Shape& shape, const RegionDecomposition& decomp);

}  // namespace shred
