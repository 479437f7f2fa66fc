#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

#include "bnsynth/dag.hpp"
#include "bnsynth/dataset.hpp"
#include "bnsynth/error.hpp"
#include "bnsynth/special_functions.hpp"

namespace bnsynth {

// Beta(alpha, beta) prior shared by every Bernoulli parameter.
struct HyperParams {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) usage_error("hyper.alpha must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) usage_error("hyper.beta must be positive");
  }
};

// Penalizing modular prior p(G) ∝ exp(-gamma * sum_j |pa(X_j)|^exponent).
// gamma = 0 is the uniform prior over DAGs.
struct PriorSpec {
  double gamma = 0.0;
  double exponent = 1.0;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) usage_error("prior.gamma must be non-negative");
    if (!(exponent > 0.0) || !std::isfinite(exponent)) usage_error("prior.exponent must be positive");
  }

  double node_term(int parent_count) const {
    if (gamma == 0.0 || parent_count == 0) return 0.0;
    return -gamma * std::pow(static_cast<double>(parent_count), exponent);
  }
};

// Beta-Bernoulli log marginal likelihood of one node given its parents:
// a sum over parent configurations of
//   lnΓ(α+β) − lnΓ(α) − lnΓ(β) + lnΓ(α+z) + lnΓ(β+n−z) − lnΓ(α+β+n).
inline double log_local_score(const SufficientStats& stats, const HyperParams& hyper) {
  const double a = hyper.alpha;
  const double b = hyper.beta;
  const double base = special::log_gamma(a + b) - special::log_gamma(a) - special::log_gamma(b);
  double total = 0.0;
  for (const auto& c : stats.table) {
    if (c.n == 0) continue;  // contributes exactly zero
    const double n = static_cast<double>(c.n);
    const double z = static_cast<double>(c.z);
    total += base + special::log_gamma(a + z) + special::log_gamma(b + n - z) - special::log_gamma(a + b + n);
  }
  if (!std::isfinite(total)) computation_error("log_local_score: non-finite result");
  return total;
}

inline double log_local_score(int node, VarSet parents, const SufficientStats& stats, const HyperParams& hyper) {
  if (stats.node != node || stats.parents != parents)
    usage_error("log_local_score: statistics do not match the requested family");
  return log_local_score(stats, hyper);
}

// Memo of local scores for one (dataset, hyperparameter) pair. Concurrent
// lookups share the lock; a racing duplicate computation stores an identical
// value.
class ScoreCache {
 public:
  ScoreCache(const BinaryDataset& data, const HyperParams& hyper)
      : data_fingerprint_(data.fingerprint()), hyper_(hyper) {}

  ScoreCache(const ScoreCache&) = delete;
  ScoreCache& operator=(const ScoreCache&) = delete;

  void check(const BinaryDataset& data, const HyperParams& hyper) const {
    if (data.fingerprint() != data_fingerprint_ || hyper.alpha != hyper_.alpha || hyper.beta != hyper_.beta)
      computation_error("score cache used with a different dataset or hyperparameters");
  }

  // Local score of (node, parents), computing and storing it on a miss.
  // `data` must be the fingerprinted dataset; callers that already validated
  // it use this on the hot path.
  double local(const BinaryDataset& data, int node, VarSet parents) {
    const std::uint64_t key = (static_cast<std::uint64_t>(node) << 32) | parents;
    {
      std::shared_lock lock(mutex_);
      if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const double value = log_local_score(sufficient_stats(data, node, parents), hyper_);
    std::unique_lock lock(mutex_);
    table_.emplace(key, value);
    return value;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return table_.size();
  }

  const HyperParams& hyper() const noexcept { return hyper_; }

 private:
  std::uint64_t data_fingerprint_;
  HyperParams hyper_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, double> table_;
};

inline double log_marginal_likelihood(const Dag& g, const BinaryDataset& data, const HyperParams& hyper,
                                      ScoreCache& cache) {
  if (g.d() != data.d())
    usage_error("log_marginal_likelihood: DAG has " + std::to_string(g.d()) + " nodes, data has " +
                std::to_string(data.d()) + " columns");
  cache.check(data, hyper);
  double total = 0.0;
  for (int i = 0; i < g.d(); ++i) total += cache.local(data, i, g.parents(i));
  return total;
}

inline double log_marginal_likelihood(const Dag& g, const BinaryDataset& data, const HyperParams& hyper) {
  ScoreCache cache(data, hyper);
  return log_marginal_likelihood(g, data, hyper, cache);
}

inline double log_prior(const Dag& g, const PriorSpec& prior) {
  double total = 0.0;
  for (VarSet r : g.rows()) total += prior.node_term(set_size(r));
  return total;
}

inline double log_posterior_unnorm(const Dag& g, const BinaryDataset& data, const HyperParams& hyper,
                                   const PriorSpec& prior, ScoreCache& cache) {
  return log_marginal_likelihood(g, data, hyper, cache) + log_prior(g, prior);
}

// Bundles everything the samplers need to weigh a family: the local score
// plus the node's prior term.
class FamilyScorer {
 public:
  FamilyScorer(const BinaryDataset& data, const HyperParams& hyper, const PriorSpec& prior, ScoreCache& cache)
      : data_(data), prior_(prior), cache_(cache) {
    hyper.validate();
    prior.validate();
    cache.check(data, hyper);
  }

  double family(int node, VarSet parents) const {
    return cache_.local(data_, node, parents) + prior_.node_term(set_size(parents));
  }

  double total(const Dag& g) const {
    double s = 0.0;
    for (int i = 0; i < g.d(); ++i) s += family(i, g.parents(i));
    return s;
  }

  const BinaryDataset& data() const noexcept { return data_; }
  const PriorSpec& prior() const noexcept { return prior_; }

 private:
  const BinaryDataset& data_;
  PriorSpec prior_;
  ScoreCache& cache_;
};

}  // namespace bnsynth
