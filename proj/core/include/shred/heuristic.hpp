#pragma once

#include "shred/operators.hpp"

namespace shred {

struct HeuristicSplitParams {
  std::size_t neighbors = 8;
  double max_normal_angle_deg = 30.0;
  /// Edges longer than this multiple of the median k-NN edge are cut.
  double length_factor = 3.0;
};

/// Deterministic geometric stand-in for a learned split: grows regions over
/// the k-NN graph of the request points, cutting edges whose normals differ
/// by more than the angle limit or whose length exceeds the length limit.
/// Components are ranked by size (ties to the lowest request index in the
/// component); the largest kSplitSlots get slots and every further component
/// joins the slot of its nearest kept point.
SplitResponse heuristic_split(const SplitRequest& request,
                              const HeuristicSplitParams& params = {});

class HeuristicSplit final : public SplitOperator {
 public:
  explicit HeuristicSplit(HeuristicSplitParams params = {}) : params_(params) {}
  SplitResponse split(const SplitRequest& request) override {
    return heuristic_split(request, params_);
  }

 private:
  HeuristicSplitParams params_;
};

}  // namespace shred
