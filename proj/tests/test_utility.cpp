#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace bnsynth;
using namespace bnsynth::testing;

namespace {

ParentConfig event(std::vector<int> vars, std::vector<std::uint8_t> values) { return {std::move(vars), std::move(values)}; }

BinaryDataset from_table(int a00, int a01, int a10, int a11) {
  std::vector<std::vector<int>> rows;
  for (int k = 0; k < a00; ++k) rows.push_back({0, 0});
  for (int k = 0; k < a01; ++k) rows.push_back({0, 1});
  for (int k = 0; k < a10; ++k) rows.push_back({1, 0});
  for (int k = 0; k < a11; ++k) rows.push_back({1, 1});
  return make_data(rows);
}

}  // namespace

TEST(ConditionalMle, Examples) {
  std::vector<std::vector<int>> rows;
  for (int r = 0; r < 10; ++r) rows.push_back({1, r < 3 ? 1 : 0});
  for (int r = 0; r < 4; ++r) rows.push_back({0, 1});
  const auto data = make_data(rows);
  EXPECT_DOUBLE_EQ(conditional_mle(data, 1, event({0}, {1})), 0.3);
  EXPECT_DOUBLE_EQ(conditional_mle(data, 1, event({0}, {0})), 1.0);
  EXPECT_DOUBLE_EQ(conditional_mle(data, 1, {}), 7.0 / 14.0);
  const auto all_ones = make_data({{1, 0}, {1, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(conditional_mle(all_ones, 0, {}), 1.0);
  EXPECT_THROW(conditional_mle(all_ones, 1, event({0}, {0})), UndefinedStatistic);
  EXPECT_EQ(error_kind([&] { conditional_mle(all_ones, 2, {}); }), static_cast<int>(ErrorKind::usage));
}

TEST(WaldCi, Examples) {
  auto ci = wald_ci(50, 100, 0.95);
  EXPECT_NEAR(ci.low, 0.402, 1e-4);
  EXPECT_NEAR(ci.high, 0.598, 1e-4);
  EXPECT_DOUBLE_EQ(ci.level, 0.95);
  ci = wald_ci(0, 10, 0.95);
  EXPECT_EQ(ci.low, 0.0);
  EXPECT_EQ(ci.high, 0.0);
  ci = wald_ci(50, 100, 0.98);
  EXPECT_NEAR(0.5 * ci.width(), 0.116317, 1e-6);
  // Clamping to [0, 1].
  ci = wald_ci(1, 3, 0.99);
  EXPECT_EQ(ci.low, 0.0);
  EXPECT_THROW(wald_ci(0, 0, 0.95), UndefinedStatistic);
  EXPECT_THROW(wald_ci(4, 3, 0.95), Error);
  EXPECT_THROW(wald_ci(1, 3, 1.0), Error);
}

TEST(Overlap, Examples) {
  EXPECT_DOUBLE_EQ(overlap_measure({0.2, 0.4}, {0.2, 0.4}), 1.0);
  EXPECT_NEAR(overlap_measure({0.2, 0.4}, {0.3, 0.5}), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(overlap_measure({0.1, 0.2}, {0.3, 0.4}), 0.0);
  EXPECT_DOUBLE_EQ(overlap_measure({0.1, 0.2}, {0.2, 0.4}), 0.0);  // touching only
  EXPECT_THROW(overlap_measure({0.3, 0.3}, {0.3, 0.3}), UndefinedStatistic);
  // One degenerate interval inside the other.
  EXPECT_NEAR(overlap_measure({0.3, 0.3}, {0.2, 0.4}), 0.0, 1e-15);
}

TEST(Overlap, Properties) {
  Rng rng(1);
  for (int t = 0; t < 5000; ++t) {
    auto draw = [&] {
      const double a = rng.uniform(), b = rng.uniform();
      return Interval{std::min(a, b), std::max(a, b), 0.95};
    };
    const Interval a = draw(), b = draw();
    if (!(a.width() + b.width() > 0)) continue;
    const double o = overlap_measure(a, b);
    EXPECT_GE(o, 0.0);
    EXPECT_LE(o, 1.0);
    EXPECT_DOUBLE_EQ(o, overlap_measure(b, a));
    const double shift = rng.uniform() * 4 - 2, scale = 0.1 + 3 * rng.uniform();
    const Interval as{scale * a.low + shift, scale * a.high + shift, 0.95};
    const Interval bs{scale * b.low + shift, scale * b.high + shift, 0.95};
    EXPECT_NEAR(overlap_measure(as, bs), o, 1e-9);
    if (a.width() > 0) EXPECT_NEAR(overlap_measure(a, a), 1.0, 1e-12);
  }
}

TEST(ChiSquare, Examples) {
  const auto flat = from_table(10, 10, 10, 10);
  EXPECT_NEAR(chi2_statistic(contingency(flat, 0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(chi2_independence(flat, 0, 1), 1.0, 1e-12);
  const auto dep = from_table(20, 10, 10, 20);
  EXPECT_NEAR(chi2_statistic(contingency(dep, 0, 1)), 20.0 / 3.0, 1e-12);
  EXPECT_NEAR(chi2_independence(dep, 0, 1), 0.009823274507519247, 1e-10);
  EXPECT_EQ(error_kind([&] { chi2_independence(dep, 1, 1); }), static_cast<int>(ErrorKind::usage));
  EXPECT_THROW(chi2_independence(from_table(0, 0, 5, 7), 0, 1), UndefinedStatistic);
  EXPECT_THROW(chi2_independence(from_table(3, 0, 5, 0), 0, 1), UndefinedStatistic);
}

TEST(ChiSquare, SymmetricAndRelabelingInvariant) {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const auto data = random_dataset(rng, 5 + rng.index(60), 3, 0.2 + 0.6 * rng.uniform());
    double p;
    try {
      p = chi2_independence(data, 0, 2);
    } catch (const UndefinedStatistic&) {
      continue;
    }
    EXPECT_NEAR(chi2_independence(data, 2, 0), p, 1e-14);
    // Flip the coding of X0: the statistic is unchanged.
    std::vector<std::uint8_t> cells;
    for (std::size_t r = 0; r < data.n(); ++r)
      for (int i = 0; i < 3; ++i) cells.push_back(i == 0 ? 1 - data.at(r, i) : data.at(r, i));
    EXPECT_NEAR(chi2_independence(BinaryDataset(data.names(), std::move(cells)), 0, 2), p, 1e-12);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(S2Combine, Examples) {
  const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5};
  auto c = s2_combine(v, 0.98);
  EXPECT_NEAR(c.point, 0.3, 1e-15);
  EXPECT_NEAR(0.5 * c.interval.width(), 0.264942, 1e-5);
  EXPECT_NEAR(c.interval.low + c.interval.high, 0.6, 1e-14);
  c = s2_combine(std::vector<double>(5, 0.5), 0.98);
  EXPECT_DOUBLE_EQ(c.point, 0.5);
  EXPECT_DOUBLE_EQ(c.interval.width(), 0.0);
  c = s2_combine(v, 0.0);
  EXPECT_DOUBLE_EQ(c.interval.width(), 0.0);
  EXPECT_THROW(s2_combine(std::vector<double>(4, 0.1), 0.98), Error);
  EXPECT_THROW(s2_combine(std::vector<double>(6, 0.1), 0.98), Error);
  EXPECT_THROW(s2_combine(std::vector<double>{0.1, 0.2, NAN, 0.4, 0.5}, 0.98), Error);
}

TEST(S2Combine, LinearInValues) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(5), w(5);
    for (auto& x : v) x = rng.uniform();
    const double a = 0.1 + rng.uniform() * 5, b = rng.normal();
    for (std::size_t i = 0; i < 5; ++i) w[i] = a * v[i] + b;
    const auto cv = s2_combine(v, 0.9), cw = s2_combine(w, 0.9);
    EXPECT_NEAR(cw.point, a * cv.point + b, 1e-12);
    EXPECT_NEAR(cw.interval.width(), a * cv.interval.width(), 1e-12);
  }
}

TEST(S2Pipeline, SelectsTopDagAndIsDeterministic) {
  Rng rng(4);
  const auto data = random_dataset(rng, 60, 3);
  const Dag g = Dag::from_matrix({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  std::vector<Dag> chain(20, g);
  chain[3] = Dag(3);
  EXPECT_EQ(top_dag(chain), g);
  // Ties go to the smaller encoding.
  std::vector<Dag> tie{g, Dag(3)};
  EXPECT_EQ(top_dag(tie), Dag(3));
  const auto specs = parse_statistics({"mle:1|0=1", "chi2:0,2"});
  const auto a = s2_pipeline(data, chain, specs, 5);
  const auto b = s2_pipeline(data, g, specs, 5);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_EQ(a[s].values.size(), 5u);
    EXPECT_EQ(a[s].values, b[s].values);
    EXPECT_DOUBLE_EQ(a[s].estimate.point, s2_combine(a[s].values, 0.98).point);
  }
  EXPECT_NE(s2_pipeline(data, g, specs, 6)[0].values, a[0].values);
  const auto post = exact_posterior(data, {}, {}, 2);
  EXPECT_EQ(s2_pipeline(data, post, specs, 5)[0].values, s2_pipeline(data, post.entries.front().dag, specs, 5)[0].values);
}

TEST(S2Pipeline, CloseToOriginalMleOnScenario) {
  const auto s = find_scenario("d3_n5000");
  const auto spec = parse_statistics({"mle:1|0=0"});
  int close = 0;
  for (int r = 0; r < 10; ++r) {
    const auto data = simulate_replication(s, r);
    const double original = conditional_mle(data, 1, spec[0].event);
    const auto out = s2_pipeline(data, s.truth, spec, derive_seed(77, {static_cast<std::uint64_t>(r)}));
    close += std::fabs(out[0].estimate.point - original) <= 0.05;
  }
  EXPECT_GE(close, 8);
}
