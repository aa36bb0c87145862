#pragma once

#include <memory>

#include "shred/requests.hpp"

namespace shred {

class SplitOperator {
 public:
  virtual ~SplitOperator() = default;
  virtual SplitResponse split(const SplitRequest& request) = 0;
};

class FixOperator {
 public:
  virtual ~FixOperator() = default;
  virtual FixResponse fix(const FixRequest& request) = 0;
};

class MergeOperator {
 public:
  virtual ~MergeOperator() = default;
  virtual MergeResponse merge(const MergeRequest& request) = 0;
};

/// Operators for each pipeline stage. A stage that is enabled must have one.
struct OperatorSet {
  std::shared_ptr<SplitOperator> split;
  std::shared_ptr<FixOperator> fix;
  std::shared_ptr<MergeOperator> merge;
};

/// Leaves every region whole.
class IdentitySplit final : public SplitOperator {
 public:
  SplitResponse split(const SplitRequest& request) override {
    return {std::vector<std::uint8_t>(request.points.point_indices.size(), 0)};
  }
};

/// Returns the inside/outside flags as probabilities, which leaves a
/// decomposition unchanged.
class FlagEchoFix final : public FixOperator {
 public:
  FixResponse fix(const FixRequest& request) override {
    FixResponse out;
    out.inside_prob.assign(request.inside_flags.begin(),
                           request.inside_flags.end());
    return out;
  }
};

class ConstantMerge final : public MergeOperator {
 public:
  explicit ConstantMerge(float probability) : probability_(probability) {}
  MergeResponse merge(const MergeRequest&) override { return {probability_}; }

 private:
  float probability_;
};

}  // namespace shred
