#include <gtest/gtest.h>

#include <random>

#include "shred/matching.hpp"
#include "shred/synthgen.hpp"
#include "support/brute.hpp"

namespace shred {
namespace {

constexpr std::size_t K = 10;

// Rows [begin, end) get a confident logit on `slot`.
void confident(InstanceMatrix& m, std::size_t begin, std::size_t end, std::size_t slot) {
  for (std::size_t r = begin; r < end; ++r) m(r, slot) = 5.0;
}

// Part A covers rows 0..39 and B rows 40..59. The prediction puts the first
// `head` rows of A on slot 0 and the rest on slot 2; B sits on slot 1.
struct TwoParts {
  InstanceMatrix logits;
  std::vector<std::uint8_t> gt;
};

TwoParts two_parts(std::size_t head) {
  TwoParts t{InstanceMatrix(60, K), std::vector<std::uint8_t>(60, 0)};
  confident(t.logits, 0, head, 0);
  confident(t.logits, head, 40, 2);
  confident(t.logits, 40, 60, 1);
  for (std::size_t r = 40; r < 60; ++r) t.gt[r] = 1;
  return t;
}

InstanceMatrix target_of(const std::vector<std::uint8_t>& gt) {
  std::vector<std::size_t> labels(gt.begin(), gt.end());
  return InstanceMatrix::one_hot(labels, K);
}

TEST(Matching, HungarianMatchesBruteForcePermutations) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 2.0);
  for (std::size_t k = 2; k <= 6; ++k) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 25;
      std::vector<std::vector<double>> logits(n, std::vector<double>(k));
      std::vector<std::size_t> labels(n);
      InstanceMatrix pred(n, k);
      for (std::size_t r = 0; r < n; ++r) {
        labels[r] = rng() % k;
        for (std::size_t c = 0; c < k; ++c) pred(r, c) = logits[r][c] = noise(rng);
      }
      const auto a = hungarian_assign(pred, InstanceMatrix::one_hot(labels, k));
      EXPECT_NEAR(a.cost, testing::brute_min_matching_cost(logits, labels), 1e-9)
          << "k=" << k << " trial=" << trial;
    }
  }
}

TEST(Matching, SolveAssignmentRectangular) {
  const std::vector<std::vector<double>> cost{{4, 1, 3}, {2, 0, 5}};
  const auto cols = solve_assignment(cost);
  ASSERT_EQ(cols.size(), 2u);
  EXPECT_EQ(cost[0][cols[0]] + cost[1][cols[1]], 3.0);  // 1 + 2
}

TEST(Matching, ArgmaxTiesGoLow) {
  InstanceMatrix m(1, 3, 1.0);
  EXPECT_EQ(m.argmax(0), 0u);
  m(0, 2) = 2.0;
  EXPECT_EQ(m.argmax(0), 2u);
  EXPECT_EQ(m.column_count(2), 1u);
}

TEST(Matching, ConfidentOversegmentationIsAccepted) {
  const auto t = two_parts(22);
  const auto plain = hungarian_assign(t.logits, target_of(t.gt));
  EXPECT_EQ(plain.pred_to_target[0], 0u);
  EXPECT_EQ(plain.pred_to_target[1], 1u);
  EXPECT_FALSE(plain.pred_to_target[2].has_value());

  const auto m = overseg_match(t.logits, target_of(t.gt));
  ASSERT_EQ(m.accepted.size(), 1u);
  EXPECT_EQ(m.accepted[0].pred_a, 0u);
  EXPECT_EQ(m.accepted[0].unused_pred, 2u);
  EXPECT_EQ(m.accepted[0].target_a, 0u);
  EXPECT_EQ(m.accepted[0].unused_target, 2u);
  EXPECT_EQ(m.modified_target.column_count(2), 18u);
  EXPECT_EQ(m.assignment[2], 2u);

  const auto hung = split_training_targets(t.gt, t.logits, TargetMatching::kHungarian);
  const auto over = split_training_targets(t.gt, t.logits, TargetMatching::kOverseg);
  for (std::size_t r = 0; r < 60; ++r) {
    const std::uint8_t split_half = r < 22 ? 0 : 2;
    EXPECT_EQ(hung[r], r < 40 ? 0 : 1) << r;
    EXPECT_EQ(over[r], r < 40 ? split_half : 1) << r;
  }
}

TEST(Matching, SmallHalfIsRejected) {
  const auto t = two_parts(31);  // 31 / 9
  const auto m = overseg_match(t.logits, target_of(t.gt));
  EXPECT_TRUE(m.accepted.empty());
  EXPECT_EQ(m.modified_target, target_of(t.gt));
  EXPECT_EQ(split_training_targets(t.gt, t.logits, TargetMatching::kOverseg),
            split_training_targets(t.gt, t.logits, TargetMatching::kHungarian));
}

TEST(Matching, MajorityOfOtherPartSplitsThatPart) {
  // Slot 2 owns 12 rows of A and 14 of B, so B is the mode and B is split.
  InstanceMatrix logits(80, K);
  std::vector<std::uint8_t> gt(80, 0);
  for (std::size_t r = 40; r < 80; ++r) gt[r] = 1;
  confident(logits, 0, 28, 0);
  confident(logits, 28, 54, 2);
  confident(logits, 54, 80, 1);
  const auto m = overseg_match(logits, target_of(gt));
  ASSERT_EQ(m.accepted.size(), 1u);
  EXPECT_EQ(m.accepted[0].target_a, 1u);
  EXPECT_EQ(m.accepted[0].pred_a, 1u);
}

TEST(Matching, EvenVoteIsRejected) {
  // 13 of A and 13 of B: mode A by the tie rule, but only half the votes.
  InstanceMatrix logits(80, K);
  std::vector<std::uint8_t> gt(80, 0);
  for (std::size_t r = 40; r < 80; ++r) gt[r] = 1;
  confident(logits, 0, 27, 0);
  confident(logits, 27, 53, 2);
  confident(logits, 53, 80, 1);
  EXPECT_TRUE(overseg_match(logits, target_of(gt)).accepted.empty());
}

}  // namespace
}  // namespace shred
