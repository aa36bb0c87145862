#pragma once

#include <optional>
#include <span>
#include <vector>

#include "shred/operators.hpp"

namespace shred {

/// Ground-truth part with the largest point overlap with `members`; ties go
/// to the lower part id.
PartId best_overlap_part(std::span<const PartId> gt,
                         std::span<const std::size_t> members);

/// Slot per member (aligned with `members`) from ground truth: parts are
/// ranked by in-region point count (ties to lower part id) and the first
/// kSplitSlots keep slots 0.. in that order. Points of the remaining parts
/// take the slot of their nearest kept-part point.
std::vector<std::uint8_t> largest_part_slots(const Shape& shape,
                                             std::span<const std::size_t> members);

SplitResponse oracle_split(const SplitRequest& request, const Shape& shape);
FixResponse oracle_fix(const FixRequest& request, const Shape& shape);
MergeResponse oracle_merge(const MergeRequest& request, const Shape& shape);

/// Operators that answer from the shape's ground-truth labels. Construction
/// throws "oracle requires ground truth" for unlabeled shapes.
class OracleSplit final : public SplitOperator {
 public:
  explicit OracleSplit(const Shape& shape);
  SplitResponse split(const SplitRequest& request) override {
    return oracle_split(request, shape_);
  }

 private:
  const Shape& shape_;
};

class OracleFix final : public FixOperator {
 public:
  explicit OracleFix(const Shape& shape);
  FixResponse fix(const FixRequest& request) override {
    return oracle_fix(request, shape_);
  }

 private:
  const Shape& shape_;
};

class OracleMerge final : public MergeOperator {
 public:
  explicit OracleMerge(const Shape& shape);
  MergeResponse merge(const MergeRequest& request) override {
    return oracle_merge(request, shape_);
  }

 private:
  const Shape& shape_;
};

OperatorSet oracle_operators(const Shape& shape);

}  // namespace shred
