#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace shred {

/// Dense row-major N x K matrix: per-point logits (prediction) or one-hot
/// rows (target).
class InstanceMatrix {
 public:
  InstanceMatrix() = default;
  InstanceMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// One-hot rows from per-point slot labels (each < cols).
  static InstanceMatrix one_hot(std::span<const std::size_t> labels,
                                std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  /// Column of the row maximum; ties go to the lower column.
  std::size_t argmax(std::size_t r) const;
  /// Number of rows whose argmax is `c`.
  std::size_t column_count(std::size_t c) const;

  friend bool operator==(const InstanceMatrix&, const InstanceMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// cost[p][t] = cross-entropy of target column t under prediction slot p:
/// -sum_i T(i,t) * log_softmax(P(i,:))[p].
std::vector<std::vector<double>> slot_costs(const InstanceMatrix& prediction,
                                            const InstanceMatrix& target);

/// Minimum-cost assignment for a rows <= cols cost matrix; returns the
/// column chosen for every row.
std::vector<std::size_t> solve_assignment(
    const std::vector<std::vector<double>>& cost);

/// Partial map prediction slot -> target slot plus its total cost.
struct Assignment {
  std::vector<std::optional<std::size_t>> pred_to_target;
  double cost = 0.0;
};

/// One-to-one matching of the non-empty target columns to prediction slots
/// minimizing total cross-entropy. Throws on shape mismatch.
Assignment hungarian_assign(const InstanceMatrix& prediction,
                            const InstanceMatrix& target);

/// An accepted over-segmentation: target slot `target_a` was split and the
/// rows closer to `unused_pred` moved to `unused_target`.
struct OversegRecord {
  std::size_t pred_a = 0;
  std::size_t unused_pred = 0;
  std::size_t target_a = 0;
  std::size_t unused_target = 0;
};

struct MatchResult {
  std::vector<std::optional<std::size_t>> assignment;  // pred -> target
  InstanceMatrix modified_target;
  std::vector<OversegRecord> accepted;
};

/// Minimum part size (exclusive) and mode fraction (exclusive) for accepting
/// an over-segmentation.
inline constexpr std::size_t kOversegMinRows = 10;
inline constexpr double kOversegMinModeFraction = 0.5;

/// Hungarian matching followed by a greedy pass that rewards confident
/// over-segmentation. Unused prediction slots are visited in ascending order,
/// each paired with the lowest still-unused target slot. For an unused
/// prediction slot U_P: A is the most common target (ties to the lower slot)
/// among rows where U_P is the argmax, P_A the slot matched to A, and A's
/// rows are divided by comparing the logits of P_A and U_P (ties stay with
/// P_A). The split is accepted when both halves have more than 10 rows and A
/// covers more than half of U_P's argmax rows. Slots with no argmax rows are
/// skipped.
MatchResult overseg_match(const InstanceMatrix& prediction,
                          const InstanceMatrix& target);

}  // namespace shred
