#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "shred/error.hpp"
#include "shred/kdtree.hpp"
#include "shred/shape.hpp"
#include "shred/shape_io.hpp"
#include "support/brute.hpp"

namespace shred {
namespace {

using testing::brute_min_distance;
using testing::random_shape;

Shape two_points(Vec3 a, Vec3 b) {
  return Shape("pair", {a, b}, {{0, 0, 1}, {0, 0, 1}}, std::vector<std::int64_t>{0, 1});
}

TEST(Normalize, AlreadyCenteredUnitRadius) {
  const std::vector<Vec3> pts{{1, 0, 0}, {-1, 0, 0}};
  const auto [out, t] = normalize_unit_sphere(pts);
  EXPECT_DOUBLE_EQ(out[0].x, 1.0);
  EXPECT_DOUBLE_EQ(out[1].x, -1.0);
  EXPECT_DOUBLE_EQ(t.scale, 1.0);
  EXPECT_DOUBLE_EQ(norm(t.center), 0.0);
}

TEST(Normalize, SinglePointKeepsUnitScale) {
  const std::vector<Vec3> pts{{2, 2, 2}};
  const auto [out, t] = normalize_unit_sphere(pts);
  EXPECT_DOUBLE_EQ(norm(out[0]), 0.0);
  EXPECT_DOUBLE_EQ(t.scale, 1.0);
  EXPECT_DOUBLE_EQ(t.center.x, 2.0);
}

TEST(Normalize, EmptyInputThrows) {
  try {
    normalize_unit_sphere({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty point set");
  }
}

TEST(Normalize, RoundTripAndUnitBall) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 7);
  std::vector<Vec3> pts(100);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  const auto [out, t] = normalize_unit_sphere(pts);
  double max_r = 0;
  Vec3 c;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    max_r = std::max(max_r, norm(out[i]));
    c += out[i];
    EXPECT_LT(distance(t.invert(out[i]), pts[i]), 1e-5);
  }
  EXPECT_NEAR(max_r, 1.0, 1e-6);
  EXPECT_LT(norm(c * (1.0 / 100)), 1e-6);
  const auto [twice, t2] = normalize_unit_sphere(out);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(distance(twice[i], out[i]), 1e-6);
}

TEST(NormalizeRegion, KeepsIndicesAndBall) {
  const auto shape = random_shape(300, 3, 5);
  std::vector<std::size_t> idx{4, 10, 10, 250, 7};
  const auto r = normalize_region(shape, idx);
  EXPECT_EQ(r.point_indices, idx);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    EXPECT_LE(norm(r.positions[k]), 1.0 + 1e-6);
    EXPECT_LT(distance(r.transform.invert(r.positions[k]), shape.positions()[idx[k]]), 1e-5);
    EXPECT_NEAR(norm(r.normals[k]), 1.0, 1e-9);
  }
}

TEST(Subsample, WithoutReplacementWhenEnough) {
  std::vector<std::size_t> idx(1000);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(1);
  const auto s = subsample_points(idx, 512, rng);
  EXPECT_EQ(s.size(), 512u);
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 512u);
}

TEST(Subsample, UpsamplesKeepingAllOriginals) {
  std::vector<std::size_t> idx(100);
  std::iota(idx.begin(), idx.end(), 1000);
  Rng rng(1);
  const auto s = subsample_points(idx, 512, rng);
  EXPECT_EQ(s.size(), 512u);
  const std::set<std::size_t> got(s.begin(), s.end());
  EXPECT_EQ(got, std::set<std::size_t>(idx.begin(), idx.end()));
}

TEST(Subsample, SeededDeterminism) {
  std::vector<std::size_t> idx(777);
  std::iota(idx.begin(), idx.end(), 0);
  Rng a(7), b(7);
  EXPECT_EQ(subsample_points(idx, 300, a), subsample_points(idx, 300, b));
}

TEST(Subsample, RejectsEmptyAndZero) {
  Rng rng(1);
  EXPECT_THROW(subsample_points({}, 3, rng), Error);
  std::vector<std::size_t> one{1};
  EXPECT_THROW(subsample_points(one, 0, rng), Error);
}

TEST(Shape, NormalizesNormalsAndDensifiesLabels) {
  Shape s("s", {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 0, 3}, {0, 2, 0}, {1, 1, 0}},
          std::vector<std::int64_t>{40, 7, 40});
  for (const auto& n : s.normals()) EXPECT_NEAR(norm(n), 1.0, 1e-4);
  const auto gt = s.gt_labels();
  EXPECT_EQ(std::vector<PartId>(gt.begin(), gt.end()), (std::vector<PartId>{1, 0, 1}));
  EXPECT_EQ(s.gt_part_count(), 2u);
}

TEST(Shape, RejectsMalformed) {
  EXPECT_THROW(Shape("e", {}, {}), Error);
  EXPECT_THROW(Shape("z", {{0, 0, 0}}, {{0, 0, 0}}), Error);
  EXPECT_THROW(Shape("m", {{0, 0, 0}}, {{0, 0, 1}, {0, 0, 1}}), Error);
  EXPECT_THROW(Shape("g", {{0, 0, 0}}, {{0, 0, 1}}, std::vector<std::int64_t>{-1}), Error);
  Shape no_gt("n", {{0, 0, 0}}, {{0, 0, 1}});
  EXPECT_THROW(no_gt.gt_labels(), Error);
}

TEST(Decomposition, PartitionChecks) {
  RegionDecomposition d("s", {3, 3, 5});
  EXPECT_EQ(d.next_id(), 6u);
  EXPECT_EQ(d.region_count(), 2u);
  EXPECT_NO_THROW(d.validate(3));
  EXPECT_THROW(d.validate(4), Error);
  EXPECT_THROW(RegionDecomposition("s", {1, 2}, 2), Error);
  EXPECT_TRUE(same_partition(std::vector<RegionId>{3, 3, 5},
                             std::vector<RegionId>{0, 0, 9}));
  EXPECT_FALSE(same_partition(std::vector<RegionId>{3, 3, 5},
                              std::vector<RegionId>{0, 1, 1}));
}

TEST(MinRegionDistance, SelfAndUnitPair) {
  const auto s = two_points({0, 0, 0}, {0, 0, 1});
  const auto d = RegionDecomposition::from_ground_truth(s);
  EXPECT_EQ(min_region_distance(s, d, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(min_region_distance(s, d, 0, 1), 1.0);
  EXPECT_THROW(min_region_distance(s, d, 0, 9), Error);
}

TEST(MinRegionDistance, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto shape = random_shape(100, 2, seed);
    std::vector<RegionId> labels(100);
    for (std::size_t i = 0; i < 100; ++i) labels[i] = i < 50 ? 0 : 1;
    RegionDecomposition d("r", labels);
    std::vector<std::size_t> a(50), b(50);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 50);
    const double expect = brute_min_distance(shape.positions(), a, b);
    EXPECT_NEAR(min_region_distance(shape, d, 0, 1), expect, 1e-9);
    EXPECT_NEAR(min_region_distance(shape, d, 1, 0), expect, 1e-9);
  }
}

TEST(KdTree, QueriesMatchBruteForce) {
  const auto shape = random_shape(2000, 1, 3);
  const auto pos = shape.positions();
  const KdTree tree(pos);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int q = 0; q < 50; ++q) {
    const Vec3 p{u(rng), u(rng), u(rng)};
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < pos.size(); ++i) all.push_back({squared_distance(pos[i], p), i});
    std::sort(all.begin(), all.end());
    EXPECT_EQ(tree.nearest(p).index, all[0].second);
    const auto knn = tree.knn(p, 10);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(knn[k].index, all[k].second);
    auto within = tree.radius(p, 0.3);
    std::sort(within.begin(), within.end());
    std::vector<std::size_t> expect;
    for (const auto& [d2, i] : all) {
      if (d2 <= 0.09) expect.push_back(i);
    }
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(within, expect);
  }
}

TEST(ShapeIo, RoundTripWithComments) {
  std::istringstream in(
      "# exported\nSHRD1 3 1\n0 0 0 0 0 1 5\n\n# mid comment\n1 0 0 0 0 2 5\n2 0 0 1 0 0 9\n");
  const auto s = read_shape(in, "t");
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.gt_part_count(), 2u);
  std::ostringstream out;
  write_shape(out, s);
  std::istringstream back(out.str());
  const auto s2 = read_shape(back, "t");
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.positions()[i].x, s2.positions()[i].x);
    EXPECT_EQ(s.gt_labels()[i], s2.gt_labels()[i]);
  }
}

TEST(ShapeIo, RejectsBadInput) {
  std::istringstream bad_header("SHRD2 1 0\n0 0 0 0 0 1\n");
  EXPECT_THROW(read_shape(bad_header, "b"), Error);
  std::istringstream short_file("SHRD1 2 0\n0 0 0 0 0 1\n");
  EXPECT_THROW(read_shape(short_file, "b"), Error);
  std::istringstream missing_gt("SHRD1 1 1\n0 0 0 0 0 1\n");
  EXPECT_THROW(read_shape(missing_gt, "b"), Error);
}

}  // namespace
}  // namespace shred
