#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bnsynth/bnsynth.hpp"

namespace bnsynth::testing {

inline BinaryDataset make_data(const std::vector<std::vector<int>>& rows, std::vector<std::string> names = {}) {
  const int d = static_cast<int>(rows.front().size());
  if (names.empty()) names = default_names(d);
  std::vector<std::uint8_t> cells;
  for (const auto& r : rows)
    for (int v : r) cells.push_back(static_cast<std::uint8_t>(v));
  return BinaryDataset(std::move(names), std::move(cells));
}

inline BinaryDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "test.csv");
}

inline BinaryDataset random_dataset(Rng& rng, std::size_t n, int d, double p = 0.5) {
  std::vector<std::uint8_t> cells(n * static_cast<std::size_t>(d));
  for (auto& c : cells) c = rng.bernoulli(p) ? 1 : 0;
  return BinaryDataset(default_names(d), std::move(cells));
}

// Uniform over a random node order, each allowed edge present with prob. 1/2,
// parent sets truncated to k members.
inline Dag random_dag(Rng& rng, int d, int k) {
  std::vector<int> order(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = d - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[rng.index(static_cast<std::size_t>(i) + 1)]);
  std::vector<VarSet> rows(static_cast<std::size_t>(d), 0);
  for (int a = 0; a < d; ++a) {
    int count = 0;
    for (int b = 0; b < a && count < k; ++b) {
      if (!rng.bernoulli(0.5)) continue;
      rows[static_cast<std::size_t>(order[a])] |= VarSet{1} << order[b];
      ++count;
    }
  }
  return Dag::from_rows(rows);
}

// Log marginal likelihood as a product of one-step-ahead Polya-urn predictive
// probabilities, accumulated row by row.
inline double polya_oracle(const Dag& g, const BinaryDataset& data, const HyperParams& h) {
  double log_p = 0.0;
  for (int i = 0; i < g.d(); ++i) {
    const auto pa = members(g.parents(i));
    std::vector<double> n(std::size_t{1} << pa.size(), 0.0), z(n.size(), 0.0);
    for (std::size_t r = 0; r < data.n(); ++r) {
      std::size_t cfg = 0;
      for (std::size_t k = 0; k < pa.size(); ++k) cfg |= std::size_t{data.at(r, pa[k])} << k;
      const double p_one = (h.alpha + z[cfg]) / (h.alpha + h.beta + n[cfg]);
      const bool one = data.at(r, i) == 1;
      log_p += std::log(one ? p_one : 1.0 - p_one);
      n[cfg] += 1;
      z[cfg] += one ? 1 : 0;
    }
  }
  return log_p;
}

inline int error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return static_cast<int>(e.kind());
  }
  return -1;
}

inline std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace bnsynth::testing
