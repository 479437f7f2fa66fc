#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnsynth/dag.hpp"
#include "bnsynth/dataset.hpp"
#include "bnsynth/error.hpp"
#include "bnsynth/score.hpp"

namespace bnsynth {

struct ExactEntry {
  Dag dag;
  std::string encoding;
  EquivalenceKey key;
  double log_weight = 0.0;  // log marginal likelihood + log prior
  double probability = 0.0;
};

struct ClassEntry {
  EquivalenceKey key;
  double probability = 0.0;
  int members = 0;
};

// Posterior over every DAG under a parent cap, by enumeration. Entries are
// sorted by descending probability, ties by encoding; classes likewise, ties
// by key.
struct ExactPosterior {
  int d = 0;
  int max_parents = 0;
  std::vector<ExactEntry> entries;
  std::vector<ClassEntry> classes;
  double log_normalizer = 0.0;

  const ExactEntry* find(const Dag& g) const {
    for (const auto& e : entries)
      if (e.dag == g) return &e;
    return nullptr;
  }

  double class_probability(const EquivalenceKey& key) const {
    for (const auto& c : classes)
      if (c.key == key) return c.probability;
    return 0.0;
  }
};

// Aggregate (key -> mass) into ClassEntry records sorted by descending mass.
inline std::vector<ClassEntry> sorted_classes(const std::map<EquivalenceKey, std::pair<double, int>>& by_key) {
  std::vector<ClassEntry> out;
  out.reserve(by_key.size());
  for (const auto& [key, mass] : by_key) out.push_back({key, mass.first, mass.second});
  std::stable_sort(out.begin(), out.end(),
                   [](const ClassEntry& a, const ClassEntry& b) { return a.probability > b.probability; });
  return out;
}

inline ExactPosterior exact_posterior(const BinaryDataset& data, const HyperParams& hyper, const PriorSpec& prior,
                                      int max_parents, ScoreCache& cache) {
  const int d = data.d();
  if (d > kMaxEnumerationNodes)
    usage_error("exact posterior needs d <= 5 (data has " + std::to_string(d) + " columns); use the MCMC sampler");
  const int k = std::min(max_parents, d - 1);
  FamilyScorer scorer(data, hyper, prior, cache);

  ExactPosterior post;
  post.d = d;
  post.max_parents = k;
  // Streaming log-sum-exp: running maximum and sum rescaled to it.
  double top = -std::numeric_limits<double>::infinity();
  double scaled_sum = 0.0;
  for_each_dag(d, k, [&](const Dag& g) {
    const double w = scorer.total(g);
    if (w > top) {
      scaled_sum = scaled_sum * std::exp(top - w) + 1.0;
      top = w;
    } else {
      scaled_sum += std::exp(w - top);
    }
    post.entries.push_back({g, encode(g), equivalence_key(g), w, 0.0});
  });
  post.log_normalizer = top + std::log(scaled_sum);
  if (!std::isfinite(post.log_normalizer)) computation_error("exact posterior: non-finite normalizer");

  std::map<EquivalenceKey, std::pair<double, int>> by_key;
  for (auto& e : post.entries) {
    e.probability = std::exp(e.log_weight - post.log_normalizer);
    auto& slot = by_key[e.key];
    slot.first += e.probability;
    slot.second += 1;
  }
  std::sort(post.entries.begin(), post.entries.end(), [](const ExactEntry& a, const ExactEntry& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.encoding < b.encoding;
  });
  post.classes = sorted_classes(by_key);
  return post;
}

inline ExactPosterior exact_posterior(const BinaryDataset& data, const HyperParams& hyper, const PriorSpec& prior,
                                      int max_parents) {
  ScoreCache cache(data, hyper);
  return exact_posterior(data, hyper, prior, max_parents, cache);
}

struct TotalVariation {
  double dag = 0.0;
  double equivalence_class = 0.0;
};

// Half the L1 distance between the empirical law of `samples` and the exact
// posterior, over DAGs and over equivalence classes.
inline TotalVariation total_variation(const std::vector<Dag>& samples, const ExactPosterior& exact) {
  if (samples.empty()) usage_error("total_variation: empty sample");
  std::unordered_map<Dag, double, DagHash> freq;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const auto& g : samples) {
    if (g.d() != exact.d) usage_error("total_variation: sample DAG size differs from the exact posterior");
    if (g.max_in_degree() > exact.max_parents)
      usage_error("total_variation: sample DAG " + encode(g) + " violates the parent cap");
    freq[g] += w;
  }
  TotalVariation tv;
  std::map<EquivalenceKey, double> class_diff;
  for (const auto& e : exact.entries) {
    const auto it = freq.find(e.dag);
    const double f = it == freq.end() ? 0.0 : it->second;
    tv.dag += std::fabs(f - e.probability);
    class_diff[e.key] += f - e.probability;
  }
  for (const auto& [_, diff] : class_diff) tv.equivalence_class += std::fabs(diff);
  tv.dag *= 0.5;
  tv.equivalence_class *= 0.5;
  return tv;
}

struct TruthSummary {
  double probability = 0.0;
  int rank = 0;  // 1-based among all DAGs
  double class_probability = 0.0;
};

inline TruthSummary true_network_posterior(const ExactPosterior& exact, const Dag& truth) {
  if (truth.d() != exact.d)
    usage_error("true_network_posterior: truth has " + std::to_string(truth.d()) + " nodes, posterior has " +
                std::to_string(exact.d));
  if (truth.max_in_degree() > exact.max_parents)
    usage_error("true_network_posterior: truth exceeds the parent cap of the enumeration");
  TruthSummary s;
  for (std::size_t i = 0; i < exact.entries.size(); ++i) {
    if (exact.entries[i].dag == truth) {
      s.probability = exact.entries[i].probability;
      s.rank = static_cast<int>(i) + 1;
      break;
    }
  }
  s.class_probability = exact.class_probability(equivalence_key(truth));
  return s;
}

}  // namespace bnsynth
