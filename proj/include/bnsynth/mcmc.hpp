#pragma once

// Random-scan blocked Gibbs sampler over DAG structures. Each iteration picks
// m distinct nodes uniformly at random and redraws their parent sets jointly
// from the exact full conditional given every other row: all admissible
// m-tuples of parent sets (each of size <= k, joint graph acyclic) are
// enumerated and weighted by their local scores plus prior terms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "bnsynth/dag.hpp"
#include "bnsynth/dataset.hpp"
#include "bnsynth/error.hpp"
#include "bnsynth/random.hpp"
#include "bnsynth/score.hpp"

namespace bnsynth {

struct McmcConfig {
  long iterations = 20000;
  long burn_in = 2000;
  long lag = 18;
  int block_size = 1;
  int max_parents = 3;
  std::uint64_t seed = 1;
  std::size_t candidate_ceiling = 500000;

  long retained() const { return iterations > burn_in && lag > 0 ? (iterations - burn_in) / lag : 0; }

  // Parent cap actually used on d nodes: max_parents clipped to d - 1.
  int effective_max_parents(int d) const { return std::min(max_parents, d - 1); }

  void validate(int d) const {
    if (iterations < 1) usage_error("mcmc.iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) usage_error("mcmc.burn_in must lie in [0, iterations)");
    if (lag < 1) usage_error("mcmc.lag must be at least 1");
    if (block_size < 1 || block_size > 3) usage_error("mcmc.block_size must be 1, 2 or 3");
    if (block_size > d) usage_error("mcmc.block_size exceeds the number of variables");
    if (max_parents < 0 || (d > 1 && max_parents < 1)) usage_error("mcmc.max_parents must be at least 1");
    if (retained() < 1) usage_error("mcmc schedule retains no samples: need (iterations - burn_in) / lag >= 1");
    if (candidate_ceiling < 1) usage_error("mcmc.candidate_ceiling must be positive");
  }
};

struct ChainOutput {
  McmcConfig config;
  std::uint64_t seed = 0;
  int d = 0;
  std::vector<Dag> samples;
  std::vector<double> log_posterior;
  std::vector<VarSet> block_log;  // rows resampled at each iteration
  long state_changes = 0;         // iterations whose draw differed from the current state
};

// Subsets of {0..d-1} \ {node} with at most k members, ascending by mask.
inline std::vector<VarSet> bounded_parent_sets(int d, int node, int k) {
  std::vector<VarSet> out;
  std::vector<int> others;
  for (int j = 0; j < d; ++j)
    if (j != node) others.push_back(j);
  auto extend = [&](auto&& self, std::size_t start, VarSet current, int size) -> void {
    out.push_back(current);
    if (size == k) return;
    for (std::size_t i = start; i < others.size(); ++i)
      self(self, i + 1, current | (VarSet{1} << others[i]), size + 1);
  };
  extend(extend, 0, 0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

// Parent sets for `node` (size <= k) that keep the graph acyclic when the
// other rows of `g` are held fixed.
inline std::vector<VarSet> admissible_parent_sets(const Dag& g, int node, int k) {
  if (node < 0 || node >= g.d()) usage_error("admissible_parent_sets: node out of range");
  const VarSet forbidden = descendants(g.rows(), node);
  std::vector<VarSet> out;
  for (VarSet s : bounded_parent_sets(g.d(), node, std::min(k, g.d() - 1)))
    if ((s & forbidden) == 0) out.push_back(s);
  return out;
}

namespace detail {

// Index drawn with probability proportional to exp(log_weights[i]).
inline std::size_t sample_log_weights(std::span<const double> log_weights, Rng& rng) {
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - top);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i] - top);
    if (u < acc) return i;
  }
  // Rounding can leave u marginally above the final partial sum.
  for (std::size_t i = log_weights.size(); i-- > 0;)
    if (std::isfinite(log_weights[i]) && log_weights[i] - top > -745.0) return i;
  return log_weights.size() - 1;
}

}  // namespace detail

// Precomputes the bounded parent-set lists once per chain.
class BlockSampler {
 public:
  BlockSampler(int d, int max_parents, std::size_t candidate_ceiling)
      : d_(d), k_(std::min(max_parents, d - 1)), ceiling_(candidate_ceiling) {
    for (int i = 0; i < d; ++i) options_.push_back(bounded_parent_sets(d, i, k_));
  }

  // Draw new parent sets for `block` from their joint full conditional.
  // Rows outside the block are unchanged.
  Dag step(const Dag& state, std::span<const int> block, const FamilyScorer& scorer, Rng& rng) const {
    if (state.d() != d_) usage_error("gibbs step: DAG size mismatch");
    for (std::size_t a = 0; a < block.size(); ++a) {
      if (block[a] < 0 || block[a] >= d_) usage_error("gibbs step: block row out of range");
      for (std::size_t b = a + 1; b < block.size(); ++b)
        if (block[a] == block[b]) usage_error("gibbs step: block rows must be distinct");
    }
    ParentRows rows = state.raw_rows();
    const std::span<VarSet> view(rows.data(), static_cast<std::size_t>(d_));
    for (int b : block) rows[static_cast<std::size_t>(b)] = 0;

    // Candidates per block row, dropping sets that would close a cycle with
    // the fixed rows alone.
    std::vector<std::vector<VarSet>> cand(block.size());
    std::size_t combos = 1;
    for (std::size_t a = 0; a < block.size(); ++a) {
      const VarSet forbidden = descendants(view, block[a]);
      for (VarSet s : options_[static_cast<std::size_t>(block[a])])
        if ((s & forbidden) == 0) cand[a].push_back(s);
      if (combos > ceiling_ / std::max<std::size_t>(cand[a].size(), 1)) combos = ceiling_ + 1;
      else combos *= cand[a].size();
    }
    if (combos > ceiling_)
      usage_error("gibbs step: full conditional has more than " + std::to_string(ceiling_) +
                  " candidate parent-set tuples; lower mcmc.block_size or mcmc.max_parents");

    std::vector<std::vector<double>> family(block.size());
    for (std::size_t a = 0; a < block.size(); ++a)
      for (VarSet s : cand[a]) family[a].push_back(scorer.family(block[a], s));

    if (block.size() == 1) {
      const auto pick = detail::sample_log_weights(family[0], rng);
      rows[static_cast<std::size_t>(block[0])] = cand[0][pick];
      return Dag::trusted(d_, rows);
    }

    std::vector<std::vector<std::size_t>> tuples;
    std::vector<double> log_weights;
    std::vector<std::size_t> idx(block.size(), 0);
    for (;;) {
      for (std::size_t a = 0; a < block.size(); ++a) rows[static_cast<std::size_t>(block[a])] = cand[a][idx[a]];
      if (rows_acyclic(view)) {
        double w = 0.0;
        for (std::size_t a = 0; a < block.size(); ++a) w += family[a][idx[a]];
        tuples.push_back(idx);
        log_weights.push_back(w);
      }
      std::size_t a = block.size();
      while (a-- > 0) {
        if (++idx[a] < cand[a].size()) break;
        idx[a] = 0;
      }
      if (a == static_cast<std::size_t>(-1)) break;
    }
    const auto& chosen = tuples[detail::sample_log_weights(log_weights, rng)];
    for (std::size_t a = 0; a < block.size(); ++a) rows[static_cast<std::size_t>(block[a])] = cand[a][chosen[a]];
    return Dag::trusted(d_, rows);
  }

  int max_parents() const noexcept { return k_; }

 private:
  int d_;
  int k_;
  std::size_t ceiling_;
  std::vector<std::vector<VarSet>> options_;
};

inline Dag gibbs_block_step(const Dag& state, std::span<const int> block, const FamilyScorer& scorer,
                            int max_parents, Rng& rng, std::size_t candidate_ceiling = 500000) {
  return BlockSampler(state.d(), max_parents, candidate_ceiling).step(state, block, scorer, rng);
}

// m distinct rows chosen uniformly (partial Fisher-Yates).
inline std::vector<int> choose_block(int d, int m, Rng& rng) {
  std::vector<int> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.index(static_cast<std::uint64_t>(d - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return pool;
}

// Runs one chain from the empty graph. Iteration t (1-based) is retained when
// t > burn_in and (t - burn_in) is a multiple of lag.
inline ChainOutput run_chain(const BinaryDataset& data, const HyperParams& hyper, const PriorSpec& prior,
                             const McmcConfig& config, ScoreCache& cache) {
  const int d = data.d();
  config.validate(d);
  FamilyScorer scorer(data, hyper, prior, cache);
  BlockSampler sampler(d, config.max_parents, config.candidate_ceiling);
  Rng rng(config.seed);

  ChainOutput out;
  out.config = config;
  out.seed = config.seed;
  out.d = d;
  out.samples.reserve(static_cast<std::size_t>(config.retained()));
  out.log_posterior.reserve(static_cast<std::size_t>(config.retained()));
  out.block_log.reserve(static_cast<std::size_t>(config.iterations));

  Dag state(d);
  for (long t = 1; t <= config.iterations; ++t) {
    const auto block = choose_block(d, config.block_size, rng);
    VarSet mask = 0;
    for (int b : block) mask |= VarSet{1} << b;
    out.block_log.push_back(mask);
    Dag next = sampler.step(state, block, scorer, rng);
    if (!(next == state)) ++out.state_changes;
    state = next;
    if (t > config.burn_in && (t - config.burn_in) % config.lag == 0) {
      out.samples.push_back(state);
      out.log_posterior.push_back(scorer.total(state));
    }
  }
  return out;
}

inline ChainOutput run_chain(const BinaryDataset& data, const HyperParams& hyper, const PriorSpec& prior,
                             const McmcConfig& config) {
  ScoreCache cache(data, hyper);
  return run_chain(data, hyper, prior, config, cache);
}

// M / (1 + 2 * sum of autocorrelations), the sum stopping before the first
// non-positive lag-t estimate. A constant series returns M.
inline double effective_sample_size(std::span<const double> series) {
  const std::size_t m = series.size();
  if (m < 10) usage_error("effective_sample_size: series needs at least 10 values");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(m);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(m);
  if (!(c0 > 0.0)) return static_cast<double>(m);
  double rho_sum = 0.0;
  for (std::size_t t = 1; t < m; ++t) {
    double ct = 0.0;
    for (std::size_t i = 0; i + t < m; ++i) ct += (series[i] - mean) * (series[i + t] - mean);
    const double rho = ct / static_cast<double>(m) / c0;
    if (rho <= 0.0) break;
    rho_sum += rho;
  }
  return static_cast<double>(m) / (1.0 + 2.0 * rho_sum);
}

}  // namespace bnsynth
