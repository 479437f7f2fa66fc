#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace bnsynth;
using namespace bnsynth::testing;

TEST(Exact, SingleNode) {
  const auto post = exact_posterior(make_data({{1}, {0}, {1}}), {}, {}, 3);
  ASSERT_EQ(post.entries.size(), 1u);
  EXPECT_NEAR(post.entries[0].probability, 1.0, 1e-15);
  EXPECT_NEAR(post.log_normalizer, std::log(2.0 / 24.0), 1e-12);  // 2! 1! / 4!
}

TEST(Exact, ThreeNodesNormalizedAndSorted) {
  Rng rng(1);
  const auto data = random_dataset(rng, 50, 3);
  const auto post = exact_posterior(data, {}, {}, 2);
  ASSERT_EQ(post.entries.size(), 25u);
  double total = 0;
  for (std::size_t i = 0; i < post.entries.size(); ++i) {
    total += post.entries[i].probability;
    if (i) EXPECT_GE(post.entries[i - 1].probability, post.entries[i].probability);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(post.classes.size(), 11u);
  double class_total = 0;
  for (const auto& c : post.classes) {
    double members = 0;
    int count = 0;
    for (const auto& e : post.entries)
      if (e.key == c.key) {
        members += e.probability;
        ++count;
      }
    EXPECT_NEAR(c.probability, members, 1e-14);
    EXPECT_EQ(c.members, count);
    class_total += c.probability;
  }
  EXPECT_NEAR(class_total, 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(post.log_normalizer));
}

TEST(Exact, UniformPriorIsProportionalToMarginalLikelihood) {
  Rng rng(2);
  const auto data = random_dataset(rng, 40, 3, 0.3);
  const auto post = exact_posterior(data, {}, {}, 2);
  double z = 0;
  for (const auto& g : enumerate_dags(3, 2)) z += std::exp(polya_oracle(g, data, {}));
  for (const auto& e : post.entries) EXPECT_NEAR(e.probability, std::exp(polya_oracle(e.dag, data, {})) / z, 1e-12);
}

TEST(Exact, CopiedColumnConcentratesOnDependentClass) {
  Rng rng(3);
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 100; ++i) {
    const int x = rng.bernoulli(0.5);
    rows.push_back({x, x});
  }
  const auto post = exact_posterior(make_data(rows), {}, {}, 1);
  ASSERT_EQ(post.entries.size(), 3u);
  EXPECT_GT(post.class_probability(equivalence_key(Dag::from_matrix({{0, 0}, {1, 0}}))), 0.99);
  EXPECT_EQ(post.classes.front().members, 2);
}

TEST(Exact, RefusesLargeD) {
  Rng rng(4);
  const auto data = random_dataset(rng, 10, 6);
  EXPECT_NE(error_text([&] { exact_posterior(data, {}, {}, 3); }).find("MCMC"), std::string::npos);
}

TEST(Exact, PenaltyShiftsOddsTowardSparserGraphs) {
  Rng rng(5);
  const auto data = random_dataset(rng, 60, 3, 0.4);
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0};
  std::vector<ExactPosterior> posts;
  for (double g : grid) posts.push_back(exact_posterior(data, {}, {g, 1.0}, 2));
  const auto all = enumerate_dags(3, 2);
  for (const auto& a : all)
    for (const auto& b : all) {
      int pa = 0, pb = 0;
      for (VarSet r : a.rows()) pa += set_size(r);
      for (VarSet r : b.rows()) pb += set_size(r);
      if (pa <= pb) continue;
      double prev = INFINITY;
      for (const auto& p : posts) {
        const double odds = p.find(a)->log_weight - p.find(b)->log_weight;
        EXPECT_LE(odds, prev + 1e-12);
        prev = odds;
      }
    }
}

TEST(TotalVariation, Examples) {
  Rng rng(6);
  const auto data = random_dataset(rng, 30, 3);
  const auto post = exact_posterior(data, {}, {}, 2);

  // A sample whose frequencies reproduce the posterior up to rounding.
  std::vector<Dag> sample;
  const int size = 1000000;
  for (const auto& e : post.entries)
    for (int i = 0, c = static_cast<int>(std::lround(e.probability * size)); i < c; ++i) sample.push_back(e.dag);
  const auto near = total_variation(sample, post);
  EXPECT_LT(near.dag, 1e-4);
  EXPECT_LT(near.equivalence_class, 1e-4);

  const auto& e = post.entries[3];
  const auto point = total_variation({e.dag}, post);
  EXPECT_NEAR(point.dag, 1.0 - e.probability, 1e-12);
  EXPECT_NEAR(point.equivalence_class, 1.0 - post.class_probability(e.key), 1e-12);
  EXPECT_LE(point.equivalence_class, point.dag + 1e-15);

  const auto capped = exact_posterior(data, {}, {}, 1);
  const auto full = Dag::from_matrix({{0, 0, 0}, {0, 0, 0}, {1, 1, 0}});
  EXPECT_THROW(total_variation({full}, capped), Error);
  EXPECT_THROW(total_variation({}, post), Error);
}

TEST(TotalVariation, DisjointSupportIsOne) {
  // Under a cap of one parent, a posterior built by hand with all mass on the
  // empty graph is disjoint from a sample of edge-only graphs.
  Rng rng(7);
  const auto data = random_dataset(rng, 20, 2);
  auto post = exact_posterior(data, {}, {}, 1);
  for (auto& e : post.entries) e.probability = e.dag == Dag(2) ? 1.0 : 0.0;
  std::vector<Dag> sample{Dag::from_matrix({{0, 0}, {1, 0}}), Dag::from_matrix({{0, 1}, {0, 0}})};
  EXPECT_NEAR(total_variation(sample, post).dag, 1.0, 1e-15);
}

TEST(TruthPosterior, RankAndClass) {
  Rng rng(8);
  const auto data = random_dataset(rng, 40, 3);
  const auto post = exact_posterior(data, {}, {}, 2);
  const auto top = true_network_posterior(post, post.entries.front().dag);
  EXPECT_EQ(top.rank, 1);
  EXPECT_DOUBLE_EQ(top.probability, post.entries.front().probability);
  EXPECT_GE(top.class_probability, top.probability);
  const auto last = true_network_posterior(post, post.entries.back().dag);
  EXPECT_EQ(last.rank, 25);
  EXPECT_THROW(true_network_posterior(post, Dag(2)), Error);
  const auto capped = exact_posterior(data, {}, {}, 1);
  EXPECT_THROW(true_network_posterior(capped, Dag::from_matrix({{0, 0, 0}, {0, 0, 0}, {1, 1, 0}})), Error);
}

TEST(TruthPosterior, IndependentCoinsFavourEmptyGraph) {
  Rng rng(9);
  const auto data = random_dataset(rng, 1000, 3, 0.5);
  const auto post = exact_posterior(data, {}, {}, 2);
  EXPECT_EQ(post.classes.front().key, equivalence_key(Dag(3)));
  EXPECT_EQ(true_network_posterior(post, Dag(3)).rank, 1);
}
