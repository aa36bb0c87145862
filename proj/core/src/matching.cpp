#include "shred/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shred/error.hpp"

namespace shred {
namespace {

void check_shapes(const InstanceMatrix& p, const InstanceMatrix& t) {
  if (p.rows() != t.rows() || p.cols() != t.cols()) {
    throw Error("prediction is " + std::to_string(p.rows()) + "x" +
                std::to_string(p.cols()) + " but target is " +
                std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
  }
}

std::size_t hot_column(const InstanceMatrix& t, std::size_t r) {
  for (std::size_t c = 0; c < t.cols(); ++c) {
    if (t(r, c) > 0.5) return c;
  }
  return t.cols();
}

}  // namespace

InstanceMatrix InstanceMatrix::one_hot(std::span<const std::size_t> labels,
                                       std::size_t cols) {
  InstanceMatrix m(labels.size(), cols);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= cols) throw Error("one-hot label out of range");
    m(r, labels[r]) = 1.0;
  }
  return m;
}

std::size_t InstanceMatrix::argmax(std::size_t r) const {
  std::size_t best = 0;
  for (std::size_t c = 1; c < cols_; ++c) {
    if ((*this)(r, c) > (*this)(r, best)) best = c;
  }
  return best;
}

std::size_t InstanceMatrix::column_count(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) n += argmax(r) == c;
  return n;
}

std::vector<std::vector<double>> slot_costs(const InstanceMatrix& prediction,
                                            const InstanceMatrix& target) {
  check_shapes(prediction, target);
  const std::size_t k = prediction.cols();
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  std::vector<double> log_prob(k);
  for (std::size_t r = 0; r < prediction.rows(); ++r) {
    double top = prediction(r, 0);
    for (std::size_t c = 1; c < k; ++c) top = std::max(top, prediction(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(prediction(r, c) - top);
    const double log_z = top + std::log(sum);
    for (std::size_t c = 0; c < k; ++c) log_prob[c] = prediction(r, c) - log_z;
    for (std::size_t t = 0; t < k; ++t) {
      const double w = target(r, t);
      if (w == 0.0) continue;
      for (std::size_t p = 0; p < k; ++p) cost[p][t] -= w * log_prob[p];
    }
  }
  return cost;
}

std::vector<std::size_t> solve_assignment(
    const std::vector<std::vector<double>>& cost) {
  // Shortest augmenting path with row/column potentials, O(n^2 m).
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost.front().size();
  if (m < n) throw Error("assignment needs at least as many columns as rows");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> row_of(m + 1, 0);  // 1-based row matched to column
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (row_of[j] != 0) col_of_row[row_of[j] - 1] = j - 1;
  }
  return col_of_row;
}

Assignment hungarian_assign(const InstanceMatrix& prediction,
                            const InstanceMatrix& target) {
  const auto cost = slot_costs(prediction, target);
  const std::size_t k = prediction.cols();
  std::vector<std::size_t> used_targets;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t r = 0; r < target.rows(); ++r) {
      if (target(r, t) != 0.0) {
        used_targets.push_back(t);
        break;
      }
    }
  }
  // Rows: non-empty target slots. Columns: prediction slots.
  std::vector<std::vector<double>> reduced(used_targets.size(),
                                           std::vector<double>(k));
  for (std::size_t i = 0; i < used_targets.size(); ++i) {
    for (std::size_t p = 0; p < k; ++p) reduced[i][p] = cost[p][used_targets[i]];
  }
  const auto pred_of = solve_assignment(reduced);
  Assignment out;
  out.pred_to_target.assign(k, std::nullopt);
  for (std::size_t i = 0; i < used_targets.size(); ++i) {
    out.pred_to_target[pred_of[i]] = used_targets[i];
    out.cost += reduced[i][pred_of[i]];
  }
  return out;
}

MatchResult overseg_match(const InstanceMatrix& prediction,
                          const InstanceMatrix& target) {
  const auto initial = hungarian_assign(prediction, target);
  const std::size_t k = prediction.cols();
  const std::size_t n = prediction.rows();
  MatchResult out{initial.pred_to_target, target, {}};

  std::vector<char> target_used(k, 0);
  for (const auto& t : out.assignment) {
    if (t) target_used[*t] = 1;
  }
  std::vector<std::size_t> row_argmax(n);
  for (std::size_t r = 0; r < n; ++r) row_argmax[r] = prediction.argmax(r);

  for (std::size_t unused_pred = 0; unused_pred < k; ++unused_pred) {
    if (out.assignment[unused_pred]) continue;
    std::size_t unused_target = k;
    for (std::size_t t = 0; t < k; ++t) {
      if (!target_used[t]) {
        unused_target = t;
        break;
      }
    }
    if (unused_target == k) break;

    std::vector<std::size_t> votes(k + 1, 0);
    std::size_t owned = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (row_argmax[r] != unused_pred) continue;
      ++owned;
      ++votes[hot_column(out.modified_target, r)];
    }
    if (owned == 0) continue;
    std::size_t mode = 0;
    for (std::size_t t = 1; t < k; ++t) {
      if (votes[t] > votes[mode]) mode = t;
    }
    std::size_t pred_a = k;
    for (std::size_t p = 0; p < k; ++p) {
      if (out.assignment[p] == mode) pred_a = p;
    }
    if (pred_a == k) continue;  // mode slot is itself unmatched

    std::vector<std::size_t> to_unused;
    std::size_t stays = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (hot_column(out.modified_target, r) != mode) continue;
      if (prediction(r, unused_pred) > prediction(r, pred_a)) {
        to_unused.push_back(r);
      } else {
        ++stays;
      }
    }
    const bool big_enough =
        stays > kOversegMinRows && to_unused.size() > kOversegMinRows;
    const bool dominant = static_cast<double>(votes[mode]) >
                          kOversegMinModeFraction * static_cast<double>(owned);
    if (!big_enough || !dominant) continue;

    for (auto r : to_unused) {
      out.modified_target(r, mode) = 0.0;
      out.modified_target(r, unused_target) = 1.0;
    }
    out.assignment[unused_pred] = unused_target;
    target_used[unused_target] = 1;
    out.accepted.push_back({pred_a, unused_pred, mode, unused_target});
  }
  return out;
}

}  // namespace shred
