#include "shred/oracle.hpp"

#include <algorithm>
#include <map>

#include "shred/error.hpp"
#include "shred/kdtree.hpp"

namespace shred {
namespace {

void require_gt(const Shape& shape) {
  if (!shape.has_gt()) throw Error("oracle requires ground truth");
}

std::uint8_t slot_of(std::span<const std::size_t> members,
                     std::span<const std::uint8_t> slots, std::size_t point) {
  const auto it = std::lower_bound(members.begin(), members.end(), point);
  if (it == members.end() || *it != point) {
    throw Error("request point " + std::to_string(point) +
                " is not a member of the region");
  }
  return slots[static_cast<std::size_t>(it - members.begin())];
}

}  // namespace

PartId best_overlap_part(std::span<const PartId> gt,
                         std::span<const std::size_t> members) {
  std::map<PartId, std::size_t> counts;
  for (auto i : members) ++counts[gt[i]];
  PartId best = 0;
  std::size_t best_count = 0;
  for (const auto& [part, count] : counts) {
    if (count > best_count) {
      best = part;
      best_count = count;
    }
  }
  return best;
}

std::vector<std::uint8_t> largest_part_slots(
    const Shape& shape, std::span<const std::size_t> members) {
  require_gt(shape);
  const auto gt = shape.gt_labels();
  std::map<PartId, std::size_t> counts;
  for (auto i : members) ++counts[gt[i]];
  std::vector<std::pair<PartId, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::map<PartId, std::uint8_t> slot_of_part;
  for (std::size_t r = 0; r < ranked.size() && r < kSplitSlots; ++r) {
    slot_of_part[ranked[r].first] = static_cast<std::uint8_t>(r);
  }

  std::vector<std::uint8_t> slots(members.size(), 0);
  std::vector<std::size_t> kept;
  std::vector<std::size_t> overflow;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto it = slot_of_part.find(gt[members[m]]);
    if (it != slot_of_part.end()) {
      slots[m] = it->second;
      kept.push_back(members[m]);
    } else {
      overflow.push_back(m);
    }
  }
  if (!overflow.empty()) {
    const KdTree tree(shape.positions(), kept);
    for (auto m : overflow) {
      const auto nearest = tree.nearest(shape.positions()[members[m]]).index;
      slots[m] = slot_of_part.at(gt[nearest]);
    }
  }
  return slots;
}

SplitResponse oracle_split(const SplitRequest& request, const Shape& shape) {
  require_gt(shape);
  std::vector<std::size_t> members = request.region_members;
  std::sort(members.begin(), members.end());
  const auto slots = largest_part_slots(shape, members);
  SplitResponse out;
  out.slots.reserve(request.points.point_indices.size());
  for (auto i : request.points.point_indices) {
    out.slots.push_back(slot_of(members, slots, i));
  }
  return out;
}

FixResponse oracle_fix(const FixRequest& request, const Shape& shape) {
  require_gt(shape);
  const auto gt = shape.gt_labels();
  const PartId target = best_overlap_part(gt, request.region_members);
  FixResponse out;
  out.inside_prob.reserve(request.points.point_indices.size());
  for (auto i : request.points.point_indices) {
    out.inside_prob.push_back(gt[i] == target ? 1.0f : 0.0f);
  }
  return out;
}

MergeResponse oracle_merge(const MergeRequest& request, const Shape& shape) {
  require_gt(shape);
  const auto gt = shape.gt_labels();
  const bool same = best_overlap_part(gt, request.first_members) ==
                    best_overlap_part(gt, request.second_members);
  return {same ? 1.0f : 0.0f};
}

OracleSplit::OracleSplit(const Shape& shape) : shape_(shape) { require_gt(shape); }
OracleFix::OracleFix(const Shape& shape) : shape_(shape) { require_gt(shape); }
OracleMerge::OracleMerge(const Shape& shape) : shape_(shape) { require_gt(shape); }

OperatorSet oracle_operators(const Shape& shape) {
  return {std::make_shared<OracleSplit>(shape), std::make_shared<OracleFix>(shape),
          std::make_shared<OracleMerge>(shape)};
}

}  // namespace shred
