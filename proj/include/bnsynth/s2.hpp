#pragma once

// The S2 baseline: five synthetic datasets from the single highest-posterior
// DAG with plug-in MLE parameters, combined with the t(4) rule.

#include <map>
#include <string>
#include <vector>

#include "bnsynth/dag.hpp"
#include "bnsynth/exact.hpp"
#include "bnsynth/mcmc.hpp"
#include "bnsynth/random.hpp"
#include "bnsynth/synth.hpp"
#include "bnsynth/utility.hpp"

namespace bnsynth {

// Most frequent structure in a chain sample; ties go to the smaller encoding.
inline Dag top_dag(std::span<const Dag> samples) {
  if (samples.empty()) usage_error("top_dag: empty sample");
  std::map<std::string, std::pair<std::size_t, Dag>> counts;
  for (const auto& g : samples) {
    auto& slot = counts[encode(g)];
    slot.first += 1;
    slot.second = g;
  }
  const std::pair<std::size_t, Dag>* best = nullptr;
  for (const auto& [_, slot] : counts)
    if (!best || slot.first > best->first) best = &slot;
  return best->second;
}

inline Dag top_dag(const ExactPosterior& exact) {
  if (exact.entries.empty()) usage_error("top_dag: empty posterior");
  return exact.entries.front().dag;
}

struct S2Result {
  StatisticSpec spec;
  std::vector<double> values;  // one per synthetic dataset
  CombinedEstimate estimate;
};

inline constexpr std::uint64_t kS2Stream = 0x5332ULL;

// Throws UndefinedStatistic if any statistic is undefined on any of the five
// datasets.
inline std::vector<S2Result> s2_pipeline(const BinaryDataset& data, const Dag& top,
                                         const std::vector<StatisticSpec>& specs, std::uint64_t seed,
                                         double level = 0.98) {
  const auto theta = mle_theta(top, data, 0.5);
  std::vector<StatisticEvaluator> evaluators;
  for (const auto& s : specs) evaluators.emplace_back(s, data);
  std::vector<S2Result> out;
  for (const auto& e : evaluators) out.push_back({e.spec(), {}, {}});
  for (std::uint64_t r = 0; r < 5; ++r) {
    Rng rng(derive_seed(seed, {kS2Stream, r}));
    const auto y = ancestral_sample(theta, data.n(), rng, data.names());
    for (std::size_t s = 0; s < evaluators.size(); ++s) out[s].values.push_back(evaluators[s](y));
  }
  for (auto& r : out) r.estimate = s2_combine(r.values, level);
  return out;
}

inline std::vector<S2Result> s2_pipeline(const BinaryDataset& data, std::span<const Dag> chain_samples,
                                         const std::vector<StatisticSpec>& specs, std::uint64_t seed,
                                         double level = 0.98) {
  return s2_pipeline(data, top_dag(chain_samples), specs, seed, level);
}

inline std::vector<S2Result> s2_pipeline(const BinaryDataset& data, const ExactPosterior& exact,
                                         const std::vector<StatisticSpec>& specs, std::uint64_t seed,
                                         double level = 0.98) {
  return s2_pipeline(data, top_dag(exact), specs, seed, level);
}

}  // namespace bnsynth
