#pragma once

// Simulation studies: the built-in scenario networks, the replication runner
// that scores structure recovery and synthetic-data utility, and the
// gamma-calibration curve.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bnsynth/dag.hpp"
#include "bnsynth/exact.hpp"
#include "bnsynth/mcmc.hpp"
#include "bnsynth/parallel.hpp"
#include "bnsynth/random.hpp"
#include "bnsynth/report.hpp"
#include "bnsynth/s2.hpp"
#include "bnsynth/score.hpp"
#include "bnsynth/synth.hpp"

namespace bnsynth {

struct Scenario {
  std::string id;
  int d = 0;
  std::size_t n = 0;
  Dag truth;
  ThetaAssignment theta_truth;
  int replications = 10;
  std::uint64_t seed = 0;
  std::vector<StatisticSpec> statistics;

  void validate() const {
    if (truth.d() != d) usage_error("scenario " + id + ": truth size differs from d");
    if (!(theta_truth.dag == truth)) usage_error("scenario " + id + ": theta is tied to a different DAG");
    theta_truth.validate();
    if (n < 1) usage_error("scenario " + id + ": n must be positive");
    if (replications < 1) usage_error("scenario " + id + ": replications must be at least 1");
  }
};

inline constexpr std::uint64_t kThetaStream = 0x7468657461ULL;
inline constexpr std::uint64_t kDataStream = 0x64617461ULL;
inline constexpr std::uint64_t kChainStream = 0x636861696EULL;
inline constexpr std::uint64_t kS1Stream = 0x5331ULL;

inline constexpr double kMinEdgeEffect = 0.2;

// Smallest, over the parents p of `node`, of the largest |theta difference|
// between two configurations that differ only in p.
inline double weakest_parent_effect(const Dag& g, int node, const std::vector<double>& table) {
  double weakest = 1.0;
  const int k = set_size(g.parents(node));
  for (int bit = 0; bit < k; ++bit) {
    double strongest = 0.0;
    for (std::size_t cfg = 0; cfg < table.size(); ++cfg)
      if (!((cfg >> bit) & 1u)) strongest = std::max(strongest, std::fabs(table[cfg | (std::size_t{1} << bit)] - table[cfg]));
    weakest = std::min(weakest, strongest);
  }
  return weakest;
}

// Every theta of `truth` uniform in [0.2, 0.8], drawn from `seed`. A node's
// table is redrawn until each of its parents moves theta by at least
// kMinEdgeEffect somewhere, so every true edge is a real dependence.
inline ThetaAssignment draw_theta_truth(const Dag& truth, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kThetaStream}));
  ThetaAssignment theta{truth, {}};
  for (int i = 0; i < truth.d(); ++i) {
    std::vector<double> t(std::size_t{1} << set_size(truth.parents(i)));
    do {
      for (double& p : t) p = 0.2 + 0.6 * rng.uniform();
    } while (weakest_parent_effect(truth, i, t) < kMinEdgeEffect);
    theta.tables.push_back(std::move(t));
  }
  return theta;
}

inline std::vector<StatisticSpec> parse_statistics(const std::vector<std::string>& texts) {
  std::vector<StatisticSpec> out;
  for (const auto& t : texts) out.push_back(StatisticSpec::parse(t));
  return out;
}

// The three simulation networks (0-based: X_k of the tables is node k-1):
//   d=3: X1, X3, X2|X1
//   d=4: X1, X4, X2|X1, X3|X4
//   d=7: X1, X3, X6, X7, X2|X1, X5|X6,X7, X4|X3,X5
// Theta is shared by all sample sizes of the same network.
inline std::vector<Scenario> builtin_scenarios() {
  struct Network {
    int d;
    std::vector<std::pair<int, int>> edges;  // (parent, child)
    std::uint64_t seed;
    std::vector<std::size_t> sizes;
    std::vector<std::string> stats;
  };
  const std::vector<Network> networks = {
      {3, {{0, 1}}, 3003, {500, 1000, 5000}, {"overlap:1|0=0", "mle:1|0=0", "overlap:2", "mle:2", "chi2:0,1"}},
      {4,
       {{0, 1}, {3, 2}},
       4004,
       {1000, 5000},
       {"overlap:1|0=0", "mle:1|0=0", "overlap:2|3=1", "mle:2|3=1", "chi2:0,1"}},
      {7,
       {{0, 1}, {5, 4}, {6, 4}, {2, 3}, {4, 3}},
       7007,
       {2000, 5000},
       {"overlap:1|0=0", "overlap:3|2=1,4=1", "mle:3|2=1,4=1", "overlap:4|5=0,6=1", "mle:4|5=0,6=1", "chi2:0,1"}},
  };
  std::vector<Scenario> out;
  for (const auto& net : networks) {
    std::vector<VarSet> rows(static_cast<std::size_t>(net.d), 0);
    for (auto [p, c] : net.edges) rows[static_cast<std::size_t>(c)] |= VarSet{1} << p;
    const Dag truth = Dag::from_rows(rows);
    const auto theta = draw_theta_truth(truth, net.seed);
    for (std::size_t n : net.sizes) {
      Scenario s;
      s.id = "d" + std::to_string(net.d) + "_n" + std::to_string(n);
      s.d = net.d;
      s.n = n;
      s.truth = truth;
      s.theta_truth = theta;
      s.replications = 10;
      s.seed = net.seed;
      s.statistics = parse_statistics(net.stats);
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline Scenario find_scenario(const std::string& id) {
  std::string valid;
  for (auto& s : builtin_scenarios()) {
    if (s.id == id) return s;
    valid += (valid.empty() ? "" : ", ") + s.id;
  }
  usage_error("unknown scenario \"" + id + "\"; valid ids: " + valid);
}

inline std::uint64_t replication_seed(const Scenario& s, int r) {
  return derive_seed(s.seed, {static_cast<std::uint64_t>(s.n), static_cast<std::uint64_t>(r)});
}

inline BinaryDataset simulate_replication(const Scenario& s, int r) {
  Rng rng(derive_seed(replication_seed(s, r), {kDataStream}));
  return ancestral_sample(s.theta_truth, s.n, rng);
}

struct MethodSet {
  bool s1 = false;
  bool s2 = false;
};

struct StatisticOutcome {
  StatisticSpec spec;
  std::optional<double> original;
  std::optional<StatisticSeries> s1;
  std::optional<S2Result> s2;
  bool s2_undefined = false;
};

struct ReplicationResult {
  int index = 0;
  std::uint64_t seed = 0;
  double truth_class_probability = 0.0;  // chain frequency of the truth's class
  bool truth_is_mode = false;
  std::string mode_class;
  std::optional<double> log_posterior_ess;
  std::optional<double> exact_truth_class_probability;
  std::optional<bool> exact_truth_is_mode;
  std::optional<TotalVariation> tv_to_exact;
  std::vector<StatisticOutcome> statistics;
};

struct ScenarioReport {
  std::string scenario;
  int d = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  HyperParams hyper;
  PriorSpec prior;
  McmcConfig mcmc;
  MethodSet methods;
  std::vector<ReplicationResult> replications;

  int mode_count() const {
    int c = 0;
    for (const auto& r : replications) c += r.truth_is_mode ? 1 : 0;
    return c;
  }

  // Mean truth-class probability among replications where the truth is (or
  // is not) the posterior mode; empty when that group is empty.
  std::optional<double> mean_probability(bool winners) const {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : replications) {
      if (r.truth_is_mode != winners) continue;
      sum += r.truth_class_probability;
      ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
  }
};

struct ExperimentOptions {
  int threads = 1;
  double hpd_level = 0.98;
  double s2_level = 0.98;
  bool exact_when_possible = true;
};

// Class probability of `truth` in `classes` and whether it is the mode
// (classes are sorted by descending probability, ties by key).
inline std::pair<double, bool> truth_in_classes(const std::vector<ClassEntry>& classes, const Dag& truth) {
  const auto key = equivalence_key(truth);
  double p = 0.0;
  for (const auto& c : classes)
    if (c.key == key) p = c.probability;
  const bool mode = !classes.empty() && classes.front().key == key;
  return {p, mode};
}

inline ReplicationResult run_replication(const Scenario& s, int r, const HyperParams& hyper, const PriorSpec& prior,
                                         const McmcConfig& mcmc, const MethodSet& methods,
                                         const ExperimentOptions& options) {
  ReplicationResult out;
  out.index = r;
  out.seed = replication_seed(s, r);
  const auto data = simulate_replication(s, r);
  ScoreCache cache(data, hyper);

  McmcConfig config = mcmc;
  config.seed = derive_seed(out.seed, {kChainStream});
  const auto chain = run_chain(data, hyper, prior, config, cache);
  const auto classes = empirical_classes(chain.samples);
  std::tie(out.truth_class_probability, out.truth_is_mode) = truth_in_classes(classes, s.truth);
  out.mode_class = classes.front().key.to_string();
  if (chain.log_posterior.size() >= 10) out.log_posterior_ess = effective_sample_size(chain.log_posterior);

  if (options.exact_when_possible && s.d <= kMaxEnumerationNodes) {
    const auto exact = exact_posterior(data, hyper, prior, config.effective_max_parents(s.d), cache);
    const auto [p, mode] = truth_in_classes(exact.classes, s.truth);
    out.exact_truth_class_probability = p;
    out.exact_truth_is_mode = mode;
    out.tv_to_exact = total_variation(chain.samples, exact);
  }

  if (!methods.s1 && !methods.s2) return out;

  std::optional<SynthesisResult> s1;
  if (methods.s1) {
    SynthesisOptions a1;
    a1.seed = derive_seed(out.seed, {kS1Stream});
    a1.hpd_level = options.hpd_level;
    s1 = run_synthesis(data, chain.samples, hyper, s.statistics, a1);
  }
  const Dag top = top_dag(chain.samples);
  for (std::size_t k = 0; k < s.statistics.size(); ++k) {
    StatisticOutcome o;
    o.spec = s.statistics[k];
    o.original = StatisticEvaluator(o.spec, data).try_evaluate(data);
    if (s1) o.s1 = s1->series[k];
    if (methods.s2) {
      try {
        o.s2 = s2_pipeline(data, top, {o.spec}, derive_seed(out.seed, {kS2Stream, k}), options.s2_level).front();
      } catch (const UndefinedStatistic&) {
        o.s2_undefined = true;
      }
    }
    out.statistics.push_back(std::move(o));
  }
  return out;
}

// Replication r depends only on (scenario seed, n, r).
inline ScenarioReport run_scenario(const Scenario& s, const PriorSpec& prior, const HyperParams& hyper,
                                   const McmcConfig& mcmc, const MethodSet& methods,
                                   const ExperimentOptions& options = {}) {
  s.validate();
  prior.validate();
  hyper.validate();
  mcmc.validate(s.d);
  ScenarioReport report;
  report.scenario = s.id;
  report.d = s.d;
  report.n = s.n;
  report.seed = s.seed;
  report.hyper = hyper;
  report.prior = prior;
  report.mcmc = mcmc;
  report.methods = methods;
  report.replications.resize(static_cast<std::size_t>(s.replications));
  parallel_for(report.replications.size(), options.threads, [&](std::size_t r) {
    report.replications[r] = run_replication(s, static_cast<int>(r), hyper, prior, mcmc, methods, options);
  });
  return report;
}

struct CalibrationResult {
  std::vector<double> grid;
  std::vector<double> probabilities;  // mean truth-class probability over replications
  std::vector<double> minimum;        // spread over replications
  std::vector<double> maximum;
  double threshold = 0.85;
  std::optional<double> gamma_star;
  bool exact = true;
};

// Strictly ascending non-negative grid.
inline void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) usage_error("calibration grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) usage_error("calibration grid values must be non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1])) usage_error("calibration grid must be strictly ascending");
  }
}

// "start:stop:step" -> start, start+step, ..., stop.
inline std::vector<double> parse_grid(const std::string& text) {
  double start = 0, stop = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
    usage_error("grid must look like start:stop:step, got \"" + text + "\"");
  if (!(step > 0.0) || stop < start) usage_error("grid needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (std::size_t i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

inline std::vector<double> default_gamma_grid() { return parse_grid("0:10:0.5"); }

struct CalibrationOptions {
  int threads = 1;
  bool allow_mcmc = false;  // permit chain-based estimates when d > 5
  McmcConfig mcmc;
  int max_parents = 3;
  double exponent = 1.0;
};

// Exact truth-class probability for every gamma in the grid on one dataset.
// Enumerates once: log weight under gamma is log ML - gamma * sum |pa|^exponent.
inline std::vector<double> exact_truth_curve(const BinaryDataset& data, const Dag& truth, const HyperParams& hyper,
                                             const std::vector<double>& grid, int max_parents, double exponent) {
  ScoreCache cache(data, hyper);
  const PriorSpec unit{1.0, exponent};
  const auto key = equivalence_key(truth);
  const int k = std::min(max_parents, data.d() - 1);
  if (truth.max_in_degree() > k) usage_error("calibration: truth exceeds the parent cap");
  std::vector<double> log_ml;
  std::vector<double> units;
  std::vector<char> in_class;
  for_each_dag(data.d(), k, [&](const Dag& g) {
    log_ml.push_back(log_marginal_likelihood(g, data, hyper, cache));
    units.push_back(-log_prior(g, unit));
    in_class.push_back(equivalence_key(g) == key ? 1 : 0);
  });
  std::vector<double> curve;
  std::vector<double> w(log_ml.size());
  for (double gamma : grid) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = log_ml[i] - gamma * units[i];
      top = std::max(top, w[i]);
    }
    double all = 0.0, hit = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double e = std::exp(w[i] - top);
      all += e;
      if (in_class[i]) hit += e;
    }
    curve.push_back(hit / all);
  }
  return curve;
}

inline CalibrationResult calibrate_gamma(const Scenario& s, const std::vector<double>& grid, double threshold,
                                         const HyperParams& hyper, const CalibrationOptions& options = {}) {
  s.validate();
  hyper.validate();
  validate_grid(grid);
  const bool exact = s.d <= kMaxEnumerationNodes;
  if (!exact && !options.allow_mcmc)
    usage_error("calibration for d > 5 needs chain-based estimates; enable them explicitly (calibrate.mcmc = true)");
  std::vector<std::vector<double>> curves(static_cast<std::size_t>(s.replications));
  parallel_for(curves.size(), options.threads, [&](std::size_t r) {
    const auto data = simulate_replication(s, static_cast<int>(r));
    if (exact) {
      curves[r] = exact_truth_curve(data, s.truth, hyper, grid, options.max_parents, options.exponent);
      return;
    }
    ScoreCache cache(data, hyper);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      McmcConfig config = options.mcmc;
      config.max_parents = options.max_parents;
      config.seed = derive_seed(replication_seed(s, static_cast<int>(r)), {kChainStream, g});
      const auto chain = run_chain(data, hyper, PriorSpec{grid[g], options.exponent}, config, cache);
      curves[r].push_back(truth_in_classes(empirical_classes(chain.samples), s.truth).first);
    }
  });
  CalibrationResult result;
  result.grid = grid;
  result.threshold = threshold;
  result.exact = exact;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0, lo = 1.0, hi = 0.0;
    for (const auto& c : curves) {
      sum += c[g];
      lo = std::min(lo, c[g]);
      hi = std::max(hi, c[g]);
    }
    const double mean = sum / static_cast<double>(curves.size());
    result.probabilities.push_back(mean);
    result.minimum.push_back(lo);
    result.maximum.push_back(hi);
    if (!result.gamma_star && mean > threshold) result.gamma_star = grid[g];
  }
  return result;
}

inline json calibration_to_json(const Scenario& s, const CalibrationResult& c) {
  json points = json::array();
  for (std::size_t g = 0; g < c.grid.size(); ++g)
    points.push_back({{"gamma", c.grid[g]},
                      {"probability", c.probabilities[g]},
                      {"min", c.minimum[g]},
                      {"max", c.maximum[g]}});
  return {{"format", "bnsynth.calibration/1"},
          {"scenario", s.id},
          {"d", s.d},
          {"n", s.n},
          {"replications", s.replications},
          {"method", c.exact ? "exact" : "mcmc"},
          {"threshold", c.threshold},
          {"gamma_star", optional_json(c.gamma_star)},
          {"curve", std::move(points)}};
}

inline json scenario_report_to_json(const ScenarioReport& rep) {
  json reps = json::array();
  for (const auto& r : rep.replications) {
    json stats = json::array();
    for (const auto& o : r.statistics) {
      json s1 = o.s1 ? series_summary_json(*o.s1) : json(nullptr);
      json s2 = o.s2 ? s2_to_json(*o.s2) : json(nullptr);
      stats.push_back({{"statistic", o.spec.label()},
                       {"original", optional_json(o.original)},
                       {"s1", std::move(s1)},
                       {"s2", std::move(s2)},
                       {"s2_undefined", o.s2_undefined}});
    }
    json tv = r.tv_to_exact ? json{{"dag", r.tv_to_exact->dag}, {"class", r.tv_to_exact->equivalence_class}}
                            : json(nullptr);
    reps.push_back({{"index", r.index},
                    {"seed", hex64(r.seed)},
                    {"truth_class_probability", r.truth_class_probability},
                    {"truth_is_mode", r.truth_is_mode},
                    {"mode_class", r.mode_class},
                    {"log_posterior_ess", optional_json(r.log_posterior_ess)},
                    {"exact_truth_class_probability", optional_json(r.exact_truth_class_probability)},
                    {"exact_truth_is_mode", optional_json(r.exact_truth_is_mode)},
                    {"tv_to_exact", std::move(tv)},
                    {"statistics", std::move(stats)}});
  }
  json methods = json::array();
  if (rep.methods.s1) methods.push_back("S1");
  if (rep.methods.s2) methods.push_back("S2");
  return {{"format", "bnsynth.scenario/1"},
          {"scenario", rep.scenario},
          {"d", rep.d},
          {"n", rep.n},
          {"seed", rep.seed},
          {"hyper", to_json(rep.hyper)},
          {"prior", to_json(rep.prior)},
          {"mcmc", to_json(rep.mcmc)},
          {"methods", std::move(methods)},
          {"summary",
           {{"replications", rep.replications.size()},
            {"truth_mode_count", rep.mode_count()},
            {"mean_probability_when_mode", optional_json(rep.mean_probability(true))},
            {"mean_probability_otherwise", optional_json(rep.mean_probability(false))}}},
          {"replications", std::move(reps)}};
}

// One row per replication x statistic.
inline std::string scenario_report_csv(const ScenarioReport& rep) {
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, *v);
    return std::string(buf, res.ptr);
  };
  std::string out =
      "scenario,replication,statistic,original,s1_mean,s1_hpd_low,s1_hpd_high,s1_undefined,s2_point,s2_low,s2_high,"
      "truth_class_probability,truth_is_mode\n";
  for (const auto& r : rep.replications) {
    for (const auto& o : r.statistics) {
      std::optional<double> s1_mean, s1_lo, s1_hi, s2_pt, s2_lo, s2_hi;
      std::string undefined;
      if (o.s1) {
        s1_mean = o.s1->mean;
        if (o.s1->hpd) {
          s1_lo = o.s1->hpd->low;
          s1_hi = o.s1->hpd->high;
        }
        undefined = std::to_string(o.s1->undefined_count);
      }
      if (o.s2) {
        s2_pt = o.s2->estimate.point;
        s2_lo = o.s2->estimate.interval.low;
        s2_hi = o.s2->estimate.interval.high;
      }
      out += rep.scenario + ',' + std::to_string(r.index) + ",\"" + o.spec.label() + "\"," + num(o.original) + ',' +
             num(s1_mean) + ',' + num(s1_lo) + ',' + num(s1_hi) + ',' + undefined + ',' + num(s2_pt) + ',' +
             num(s2_lo) + ',' + num(s2_hi) + ',' + num(r.truth_class_probability) + ',' +
             (r.truth_is_mode ? "1" : "0") + '\n';
    }
  }
  return out;
}

}  // namespace bnsynth
