#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "helpers.hpp"

using namespace bnsynth;
using namespace bnsynth::testing;

namespace {
const auto kFour = [] { return make_data({{1, 1}, {1, 0}, {0, 1}, {0, 0}}); };
}

TEST(LocalScore, SequentialPredictiveExamples) {
  const auto single = make_data({{1}, {0}});
  EXPECT_NEAR(log_local_score(sufficient_stats(single, 0, 0), {}), std::log(1.0 / 6.0), 1e-13);
  const auto data = kFour();
  EXPECT_NEAR(log_local_score(1, 0b1, sufficient_stats(data, 1, 0b1), {}), std::log(1.0 / 36.0), 1e-13);
  EXPECT_NEAR(log_local_score(0, 0, sufficient_stats(data, 0, 0), {}), std::log(1.0 / 30.0), 1e-13);
  EXPECT_THROW(log_local_score(0, 0b10, sufficient_stats(data, 1, 0b1), {}), Error);
}

TEST(LocalScore, EmptyConfigurationContributesZero) {
  // X1 is always 0, so configuration X1 = 1 is empty for node 0.
  const auto data = make_data({{1, 0}, {0, 0}, {1, 0}});
  for (double a : {0.5, 1.0, 3.0}) {
    const HyperParams h{a, 2.0};
    SufficientStats s = sufficient_stats(data, 0, 0b10);
    ASSERT_EQ(s.table[1].n, 0u);
    const double with_empty = log_local_score(s, h);
    s.table.pop_back();
    EXPECT_DOUBLE_EQ(with_empty, log_local_score(s, h));
  }
}

TEST(LocalScore, EveryTermIsAtMostZeroForUniformHyper) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto data = random_dataset(rng, 1 + rng.index(40), 3, rng.uniform());
    for (int node = 0; node < 3; ++node)
      for (VarSet pa = 0; pa < 8; ++pa) {
        if (contains(pa, node)) continue;
        auto s = sufficient_stats(data, node, pa);
        for (const auto& c : s.table) {
          SufficientStats one{node, pa, {c}};
          EXPECT_LE(log_local_score(one, {}), 1e-15);
        }
      }
  }
}

TEST(MarginalLikelihood, WorkedExample) {
  const auto g = Dag::from_matrix({{0, 0}, {1, 0}});
  EXPECT_NEAR(log_marginal_likelihood(g, kFour(), {}), std::log(1.0 / 1080.0), 1e-12);
  EXPECT_THROW(log_marginal_likelihood(Dag(3), kFour(), {}), Error);
}

TEST(MarginalLikelihood, EmptyGraphIsSumOfColumns) {
  Rng rng(8);
  const auto data = random_dataset(rng, 50, 4);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    std::vector<std::uint8_t> col;
    for (std::size_t r = 0; r < data.n(); ++r) col.push_back(data.at(r, i));
    sum += log_marginal_likelihood(Dag(1), BinaryDataset({"c"}, col), {});
  }
  EXPECT_NEAR(log_marginal_likelihood(Dag(4), data, {}), sum, 1e-10);
}

TEST(MarginalLikelihood, MatchesPolyaOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(4));
    const auto g = random_dag(rng, d, d - 1);
    const auto data = random_dataset(rng, 1 + rng.index(12), d, 0.1 + 0.8 * rng.uniform());
    const HyperParams h{0.3 + 3 * rng.uniform(), 0.3 + 3 * rng.uniform()};
    EXPECT_NEAR(log_marginal_likelihood(g, data, h), polya_oracle(g, data, h), 1e-10);
  }
}

// Reversing X0 -> X1 rescales the Beta(1,1) score by the ratio of margin
// products; the score is not equivalence-invariant in general.
TEST(MarginalLikelihood, ReversalRatioOnAllSmallDatasets) {
  const auto fwd = Dag::from_matrix({{0, 0}, {1, 0}});
  const auto rev = Dag::from_matrix({{0, 1}, {0, 0}});
  int unequal = 0;
  for (int n = 1; n <= 4; ++n) {
    for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
      std::vector<std::uint8_t> cells;
      for (int b = 0; b < 2 * n; ++b) cells.push_back((mask >> b) & 1u);
      const BinaryDataset data({"a", "b"}, cells);
      double row[2] = {0, 0}, col[2] = {0, 0};
      for (std::size_t r = 0; r < data.n(); ++r) {
        row[data.at(r, 0)] += 1;
        col[data.at(r, 1)] += 1;
      }
      const double expected = std::log((col[0] + 1) * (col[1] + 1)) - std::log((row[0] + 1) * (row[1] + 1));
      const double diff = log_marginal_likelihood(fwd, data, {}) - log_marginal_likelihood(rev, data, {});
      EXPECT_NEAR(diff, expected, 1e-12);
      if (row[0] * row[1] == col[0] * col[1] && row[0] + row[1] == col[0] + col[1]) EXPECT_NEAR(diff, 0.0, 1e-12);
      unequal += std::fabs(diff) > 1e-9;
    }
  }
  EXPECT_GT(unequal, 0);
}

TEST(MarginalLikelihood, EqualOnMarginSymmetricData) {
  const auto fwd = Dag::from_matrix({{0, 0}, {1, 0}});
  const auto rev = Dag::from_matrix({{0, 1}, {0, 0}});
  EXPECT_NEAR(log_marginal_likelihood(fwd, kFour(), {}), log_marginal_likelihood(rev, kFour(), {}), 1e-12);
}

TEST(Prior, Examples) {
  EXPECT_EQ(log_prior(Dag(3), {2.0, 1.5}), 0.0);
  const auto g = Dag::from_matrix({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}});  // sizes 0, 1, 2
  EXPECT_DOUBLE_EQ(log_prior(g, {2.0, 1.0}), -6.0);
  EXPECT_DOUBLE_EQ(log_prior(g, {1.0, 2.0}), -5.0);
  EXPECT_EQ(log_prior(g, {0.0, 1.0}), 0.0);
  EXPECT_THROW((PriorSpec{-1.0, 1.0}.validate()), Error);
  EXPECT_THROW((PriorSpec{1.0, 0.0}.validate()), Error);
  EXPECT_THROW((HyperParams{0.0, 1.0}.validate()), Error);
  EXPECT_THROW((HyperParams{1.0, -2.0}.validate()), Error);
}

TEST(Posterior, Decomposability) {
  Rng rng(12);
  const auto data = random_dataset(rng, 80, 4);
  ScoreCache cache(data, {});
  const PriorSpec prior{1.5, 1.0};
  const auto g = Dag::from_matrix({{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}});
  EXPECT_NEAR(log_posterior_unnorm(g, data, {}, {0.0, 1.0}, cache), log_marginal_likelihood(g, data, {}, cache), 0);
  const auto h = g.with_parents(3, 0b110);  // node 3 gains parent 2
  const double delta = log_posterior_unnorm(h, data, {}, prior, cache) - log_posterior_unnorm(g, data, {}, prior, cache);
  const double expected = log_local_score(sufficient_stats(data, 3, 0b110), {}) -
                          log_local_score(sufficient_stats(data, 3, 0b010), {}) - prior.gamma * 2 + prior.gamma * 1;
  EXPECT_NEAR(delta, expected, 1e-10);
}

TEST(ScoreCache, HitsAreBitIdenticalAndFingerprinted) {
  Rng rng(1);
  const auto data = random_dataset(rng, 30, 3);
  ScoreCache cache(data, {});
  const double first = cache.local(data, 2, 0b11);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(cache.local(data, 2, 0b11), first);
  EXPECT_EQ(first, log_local_score(sufficient_stats(data, 2, 0b11), {}));
  EXPECT_EQ(cache.size(), 1u);
  const auto other = random_dataset(rng, 30, 3);
  EXPECT_EQ(error_kind([&] { cache.check(other, {}); }), static_cast<int>(ErrorKind::computation));
  EXPECT_THROW(cache.check(data, {2.0, 1.0}), Error);
  EXPECT_THROW(log_marginal_likelihood(Dag(3), other, {}, cache), Error);
  EXPECT_NO_THROW(cache.check(data, {}));
}

TEST(ScoreCache, ConcurrentReadersAgree) {
  Rng rng(4);
  const auto data = random_dataset(rng, 200, 5);
  ScoreCache cache(data, {});
  std::vector<double> results(8 * 80);
  {
    std::vector<std::jthread> workers;
    for (int t = 0; t < 8; ++t)
      workers.emplace_back([&, t] {
        for (int i = 0; i < 80; ++i) {
          const int node = i % 5;
          const VarSet pa = static_cast<VarSet>((i * 7) % 32) & ~(VarSet{1} << node);
          results[static_cast<std::size_t>(t * 80 + i)] = cache.local(data, node, pa);
        }
      });
  }
  for (int t = 1; t < 8; ++t)
    for (int i = 0; i < 80; ++i) EXPECT_EQ(results[t * 80 + i], results[i]);
}
