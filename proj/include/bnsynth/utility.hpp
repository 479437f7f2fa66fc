#pragma once

// Utility statistics computed on a dataset: the conditional MLE, Wald
// intervals and their overlap, and the Pearson chi-square independence
// p-value; plus the five-dataset combining rule used by the S2 baseline.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "bnsynth/dataset.hpp"
#include "bnsynth/error.hpp"
#include "bnsynth/special_functions.hpp"

namespace bnsynth {

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double level = 0.0;

  double width() const { return high - low; }
};

// z / n for `node` among rows matching `event`.
inline double conditional_mle(const BinaryDataset& data, int node, const ParentConfig& event) {
  if (node < 0 || node >= data.d()) usage_error("conditional_mle: node out of range");
  event.validate(data.d());
  const auto c = event_counts(data, node, event);
  if (c.n == 0) throw UndefinedStatistic("conditional_mle: conditioning event never occurs");
  return static_cast<double>(c.z) / static_cast<double>(c.n);
}

// p ± q * sqrt(p(1-p)/n), q the standard-normal quantile at (1+level)/2,
// clamped to [0, 1].
inline Interval wald_ci(std::size_t z, std::size_t n, double level) {
  if (n == 0) throw UndefinedStatistic("wald_ci: no trials");
  if (z > n) usage_error("wald_ci: successes exceed trials");
  if (!(level >= 0.0 && level < 1.0)) usage_error("wald_ci: level must lie in [0, 1)");
  const double p = static_cast<double>(z) / static_cast<double>(n);
  const double q = level == 0.0 ? 0.0 : special::normal_quantile(0.5 * (1.0 + level));
  const double half = q * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {std::clamp(p - half, 0.0, 1.0), std::clamp(p + half, 0.0, 1.0), level};
}

// 2 (min(u1,u2) - max(l1,l2)) / ((u1-l1) + (u2-l2)) when the intervals
// overlap, 0 otherwise.
inline double overlap_measure(const Interval& a, const Interval& b) {
  const double widths = a.width() + b.width();
  if (!(widths > 0.0)) throw UndefinedStatistic("overlap_measure: both intervals are degenerate");
  const double inner = std::min(a.high, b.high) - std::max(a.low, b.low);
  if (inner <= 0.0) return 0.0;
  return std::clamp(2.0 * inner / widths, 0.0, 1.0);
}

// 2x2 table of counts, cell [a][b] = rows with X_i = a and X_j = b.
struct Table2x2 {
  double cell[2][2] = {{0, 0}, {0, 0}};
};

inline Table2x2 contingency(const BinaryDataset& data, int i, int j) {
  Table2x2 t;
  for (std::size_t r = 0; r < data.n(); ++r) t.cell[data.at(r, i)][data.at(r, j)] += 1.0;
  return t;
}

// Pearson statistic without continuity correction.
inline double chi2_statistic(const Table2x2& t) {
  const double r0 = t.cell[0][0] + t.cell[0][1];
  const double r1 = t.cell[1][0] + t.cell[1][1];
  const double c0 = t.cell[0][0] + t.cell[1][0];
  const double c1 = t.cell[0][1] + t.cell[1][1];
  if (r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0)
    throw UndefinedStatistic("chi2_independence: a marginal total is zero");
  const double n = r0 + r1;
  const double det = t.cell[0][0] * t.cell[1][1] - t.cell[0][1] * t.cell[1][0];
  return n * det * det / (r0 * r1 * c0 * c1);
}

inline double chi2_independence(const Table2x2& t) { return special::chi2_sf(chi2_statistic(t), 1.0); }

inline double chi2_independence(const BinaryDataset& data, int i, int j) {
  if (i < 0 || j < 0 || i >= data.d() || j >= data.d()) usage_error("chi2_independence: index out of range");
  if (i == j) usage_error("chi2_independence: the two variables must differ");
  return chi2_independence(contingency(data, i, j));
}

struct CombinedEstimate {
  double point = 0.0;
  Interval interval;
};

// Mean of five values with a t(4) interval: mean ± t_{4,α/2} s / sqrt(5).
inline CombinedEstimate s2_combine(std::span<const double> values, double level) {
  if (values.size() != 5) usage_error("s2_combine: exactly 5 values are required");
  if (!(level >= 0.0 && level < 1.0)) usage_error("s2_combine: level must lie in [0, 1)");
  for (double v : values)
    if (!std::isfinite(v)) usage_error("s2_combine: values must be finite");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / 5.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / 4.0);
  const double t = level == 0.0 ? 0.0 : special::t_quantile(0.5 * (1.0 + level), 4.0);
  const double half = t * s / std::sqrt(5.0);
  return {mean, {mean - half, mean + half, level}};
}

}  // namespace bnsynth
