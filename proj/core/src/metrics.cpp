#include "shred/metrics.hpp"

#include <algorithm>
#include <map>

#include "shred/error.hpp"

namespace shred {
namespace {

// Sparse region x part contingency table.
struct Overlap {
  std::vector<RegionId> region_ids;
  std::vector<std::size_t> region_size;
  std::vector<std::size_t> part_size;
  // Per dense region index: (part, count) pairs ascending by part.
  std::vector<std::vector<std::pair<PartId, std::size_t>>> cells;
};

Overlap build_overlap(std::span<const RegionId> regions,
                      std::span<const PartId> gt) {
  if (regions.size() != gt.size()) {
    throw Error("decomposition has " + std::to_string(regions.size()) +
                " points but ground truth has " + std::to_string(gt.size()));
  }
  if (gt.empty()) throw Error("empty point set");
  Overlap o;
  o.region_ids.assign(regions.begin(), regions.end());
  std::sort(o.region_ids.begin(), o.region_ids.end());
  o.region_ids.erase(std::unique(o.region_ids.begin(), o.region_ids.end()),
                     o.region_ids.end());
  const PartId parts = *std::max_element(gt.begin(), gt.end()) + 1;
  o.part_size.assign(parts, 0);
  o.region_size.assign(o.region_ids.size(), 0);
  std::vector<std::map<PartId, std::size_t>> cells(o.region_ids.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto r = static_cast<std::size_t>(
        std::lower_bound(o.region_ids.begin(), o.region_ids.end(), regions[i]) -
        o.region_ids.begin());
    ++o.region_size[r];
    ++o.part_size[gt[i]];
    ++cells[r][gt[i]];
  }
  o.cells.resize(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    o.cells[r].assign(cells[r].begin(), cells[r].end());
  }
  return o;
}

double iou(std::size_t inter, std::size_t a, std::size_t b) {
  return static_cast<double>(inter) / static_cast<double>(a + b - inter);
}

double mean(std::span<const double> values) {
  double sum = 0.0;
  for (auto v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

EvalReport evaluate(const std::string& shape_id,
                    std::span<const RegionId> regions,
                    std::span<const PartId> gt) {
  const auto o = build_overlap(regions, gt);
  const std::size_t parts = o.part_size.size();

  std::vector<double> best_iou(parts, 0.0);
  std::vector<std::size_t> kept(parts, 0);  // points keeping their label
  for (std::size_t r = 0; r < o.cells.size(); ++r) {
    PartId best_part = 0;
    double best = -1.0;
    for (const auto& [part, count] : o.cells[r]) {
      const double v = iou(count, o.region_size[r], o.part_size[part]);
      best_iou[part] = std::max(best_iou[part], v);
      if (v > best) {  // ascending part order: ties keep the lower id
        best = v;
        best_part = part;
      }
    }
    for (const auto& [part, count] : o.cells[r]) {
      if (part == best_part) kept[part] += count;
    }
  }

  EvalReport report;
  report.shape_id = shape_id;
  report.region_count = o.region_ids.size();
  std::vector<double> fractions;
  std::vector<double> ious;
  for (PartId p = 0; p < parts; ++p) {
    if (o.part_size[p] == 0) continue;  // only for non-dense raw labels
    const double fraction =
        static_cast<double>(kept[p]) / static_cast<double>(o.part_size[p]);
    fractions.push_back(fraction);
    ious.push_back(best_iou[p]);
    report.per_gt_part.push_back({p, best_iou[p], fraction});
  }
  report.purity = mean(fractions);
  report.aiou = mean(ious);
  return report;
}

EvalReport evaluate(const Shape& shape, const RegionDecomposition& decomp) {
  return evaluate(shape.id(), decomp.labels(), shape.gt_labels());
}

double region_purity(std::span<const RegionId> regions,
                     std::span<const PartId> gt) {
  return evaluate("", regions, gt).purity;
}

double aiou(std::span<const RegionId> regions, std::span<const PartId> gt) {
  return evaluate("", regions, gt).aiou;
}

}  // namespace shred
