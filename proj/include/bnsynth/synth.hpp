#pragma once

// Posterior-predictive synthetic data: theta | G, X draws, ancestral sampling
// of synthetic datasets, the statistics evaluated on them, and the driver
// that turns a posterior sample of structures into predictive samples of
// those statistics.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnsynth/dag.hpp"
#include "bnsynth/dataset.hpp"
#include "bnsynth/error.hpp"
#include "bnsynth/mcmc.hpp"
#include "bnsynth/parallel.hpp"
#include "bnsynth/random.hpp"
#include "bnsynth/score.hpp"
#include "bnsynth/utility.hpp"

namespace bnsynth {

// Success probability per node and parent configuration, indexed like
// SufficientStats (lowest parent index = least significant bit).
struct ThetaAssignment {
  Dag dag;
  std::vector<std::vector<double>> tables;

  void validate() const {
    if (tables.size() != static_cast<std::size_t>(dag.d())) usage_error("theta: one table per node required");
    for (int i = 0; i < dag.d(); ++i) {
      const auto& t = tables[static_cast<std::size_t>(i)];
      if (t.size() != (std::size_t{1} << set_size(dag.parents(i))))
        usage_error("theta: table of node " + std::to_string(i) + " does not match its parent set");
      for (double p : t)
        if (!(p >= 0.0 && p <= 1.0)) usage_error("theta: probabilities must lie in [0, 1]");
    }
  }
};

// Independent Beta(alpha + z_j, beta + n_j - z_j) draw for every configuration.
inline ThetaAssignment sample_theta(const Dag& g, const BinaryDataset& data, const HyperParams& hyper, Rng& rng) {
  if (g.d() != data.d()) usage_error("sample_theta: DAG and data dimensions differ");
  ThetaAssignment theta{g, {}};
  theta.tables.reserve(static_cast<std::size_t>(g.d()));
  for (int i = 0; i < g.d(); ++i) {
    const auto stats = sufficient_stats(data, i, g.parents(i));
    std::vector<double> t;
    t.reserve(stats.table.size());
    for (const auto& c : stats.table)
      t.push_back(rng.beta(hyper.alpha + static_cast<double>(c.z), hyper.beta + static_cast<double>(c.n - c.z)));
    theta.tables.push_back(std::move(t));
  }
  return theta;
}

// z_j / n_j per configuration; configurations never observed get `fallback`.
inline ThetaAssignment mle_theta(const Dag& g, const BinaryDataset& data, double fallback = 0.5) {
  if (g.d() != data.d()) usage_error("mle_theta: DAG and data dimensions differ");
  ThetaAssignment theta{g, {}};
  for (int i = 0; i < g.d(); ++i) {
    const auto stats = sufficient_stats(data, i, g.parents(i));
    std::vector<double> t;
    for (const auto& c : stats.table)
      t.push_back(c.n == 0 ? fallback : static_cast<double>(c.z) / static_cast<double>(c.n));
    theta.tables.push_back(std::move(t));
  }
  return theta;
}

inline std::vector<std::string> default_names(int d) {
  std::vector<std::string> names;
  for (int i = 1; i <= d; ++i) names.push_back("X" + std::to_string(i));
  return names;
}

// n rows drawn i.i.d. from the factorized joint, nodes visited in
// topological order.
inline BinaryDataset ancestral_sample(const ThetaAssignment& theta, std::size_t n, Rng& rng,
                                      std::vector<std::string> names = {}) {
  theta.validate();
  const Dag& g = theta.dag;
  const int d = g.d();
  if (n == 0) usage_error("ancestral_sample: n must be positive");
  if (names.empty()) names = default_names(d);
  if (names.size() != static_cast<std::size_t>(d)) usage_error("ancestral_sample: wrong number of names");
  const auto order = topological_order(g);
  std::vector<std::vector<int>> parents(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) parents[static_cast<std::size_t>(i)] = members(g.parents(i));
  std::vector<std::uint8_t> cells(n * static_cast<std::size_t>(d));
  for (std::size_t r = 0; r < n; ++r) {
    std::uint8_t* row = &cells[r * static_cast<std::size_t>(d)];
    for (int node : order) {
      std::size_t cfg = 0;
      const auto& pa = parents[static_cast<std::size_t>(node)];
      for (std::size_t k = 0; k < pa.size(); ++k) cfg |= static_cast<std::size_t>(row[pa[k]]) << k;
      row[node] = rng.bernoulli(theta.tables[static_cast<std::size_t>(node)][cfg]) ? 1 : 0;
    }
  }
  return BinaryDataset(std::move(names), std::move(cells));
}

enum class StatisticKind { ci_overlap, conditional_mle, chi2_pvalue };

// A statistic h(Y). Text form (0-based indices):
//   mle:NODE[|VAR=VAL,...]             conditional MLE of P(X_NODE = 1 | event)
//   overlap:NODE[|VAR=VAL,...][@LEVEL]  Wald-CI overlap with the original data
//   chi2:I,J                           chi-square independence p-value
struct StatisticSpec {
  StatisticKind kind = StatisticKind::conditional_mle;
  int node = 0;
  ParentConfig event;
  int i = 0;
  int j = 1;
  double level = 0.95;

  void validate(int d) const {
    switch (kind) {
      case StatisticKind::ci_overlap:
        if (!(level > 0.0 && level < 1.0)) usage_error("statistic level must lie in (0, 1)");
        [[fallthrough]];
      case StatisticKind::conditional_mle:
        if (node < 0 || node >= d) usage_error("statistic node index out of range");
        event.validate(d);
        if (std::find(event.variables.begin(), event.variables.end(), node) != event.variables.end())
          usage_error("statistic conditions on its own target variable");
        break;
      case StatisticKind::chi2_pvalue:
        if (i < 0 || j < 0 || i >= d || j >= d) usage_error("chi2 statistic index out of range");
        if (i == j) usage_error("chi2 statistic needs two different variables");
        break;
    }
  }

  std::string label() const {
    auto event_text = [this] {
      std::string s = std::to_string(node);
      for (std::size_t k = 0; k < event.variables.size(); ++k) {
        s += k == 0 ? '|' : ',';
        s += std::to_string(event.variables[k]) + '=' + std::to_string(event.assignment[k]);
      }
      return s;
    };
    switch (kind) {
      case StatisticKind::conditional_mle: return "mle:" + event_text();
      case StatisticKind::ci_overlap: {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, level);
        return "overlap:" + event_text() + '@' + std::string(buf, res.ptr);
      }
      case StatisticKind::chi2_pvalue: return "chi2:" + std::to_string(i) + ',' + std::to_string(j);
    }
    return {};
  }

  static StatisticSpec parse(std::string_view text) {
    auto fail = [&text](const std::string& why) -> StatisticSpec {
      usage_error("bad statistic \"" + std::string(text) + "\": " + why);
    };
    auto to_int = [&](std::string_view s) {
      int v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) fail("expected an integer, got \"" + std::string(s) + "\"");
      return v;
    };
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) return fail("missing ':'");
    const auto kind = text.substr(0, colon);
    auto body = text.substr(colon + 1);
    StatisticSpec spec;
    if (kind == "chi2") {
      spec.kind = StatisticKind::chi2_pvalue;
      const auto comma = body.find(',');
      if (comma == std::string_view::npos) return fail("expected I,J");
      spec.i = to_int(body.substr(0, comma));
      spec.j = to_int(body.substr(comma + 1));
      return spec;
    }
    if (kind == "mle") spec.kind = StatisticKind::conditional_mle;
    else if (kind == "overlap") spec.kind = StatisticKind::ci_overlap;
    else return fail("unknown kind \"" + std::string(kind) + "\" (expected mle, overlap or chi2)");
    if (spec.kind == StatisticKind::ci_overlap) {
      if (const auto at = body.find('@'); at != std::string_view::npos) {
        const auto lv = body.substr(at + 1);
        auto [p, ec] = std::from_chars(lv.data(), lv.data() + lv.size(), spec.level);
        if (ec != std::errc() || p != lv.data() + lv.size()) return fail("bad level");
        body = body.substr(0, at);
      }
    }
    const auto bar = body.find('|');
    spec.node = to_int(body.substr(0, bar));
    if (bar != std::string_view::npos) {
      std::vector<std::pair<int, int>> conds;
      auto rest = body.substr(bar + 1);
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) return fail("condition must be VAR=VAL");
        conds.emplace_back(to_int(item.substr(0, eq)), to_int(item.substr(eq + 1)));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      std::sort(conds.begin(), conds.end());
      for (auto [v, val] : conds) {
        if (val != 0 && val != 1) return fail("condition values must be 0 or 1");
        spec.event.variables.push_back(v);
        spec.event.assignment.push_back(static_cast<std::uint8_t>(val));
      }
    }
    return spec;
  }
};

// Evaluates one statistic on synthetic datasets; overlap statistics compare
// against the interval computed once on the original data.
class StatisticEvaluator {
 public:
  StatisticEvaluator(StatisticSpec spec, const BinaryDataset& original) : spec_(std::move(spec)) {
    spec_.validate(original.d());
    if (spec_.kind == StatisticKind::ci_overlap) {
      const auto c = event_counts(original, spec_.node, spec_.event);
      original_ci_ = wald_ci(c.z, c.n, spec_.level);
    }
  }

  // Throws UndefinedStatistic when h(data) does not exist.
  double operator()(const BinaryDataset& data) const {
    switch (spec_.kind) {
      case StatisticKind::conditional_mle: return conditional_mle(data, spec_.node, spec_.event);
      case StatisticKind::chi2_pvalue: return chi2_independence(data, spec_.i, spec_.j);
      case StatisticKind::ci_overlap: {
        const auto c = event_counts(data, spec_.node, spec_.event);
        return overlap_measure(*original_ci_, wald_ci(c.z, c.n, spec_.level));
      }
    }
    return 0.0;
  }

  std::optional<double> try_evaluate(const BinaryDataset& data) const {
    try {
      return (*this)(data);
    } catch (const UndefinedStatistic&) {
      return std::nullopt;
    }
  }

  const StatisticSpec& spec() const noexcept { return spec_; }

 private:
  StatisticSpec spec_;
  std::optional<Interval> original_ci_;
};

// Shortest window of sorted values holding ceil(level * count) of them;
// leftmost window on ties.
inline Interval hpd_interval(std::span<const double> values, double level) {
  if (values.empty()) usage_error("hpd_interval: no values");
  if (!(level > 0.0 && level <= 1.0)) usage_error("hpd_interval: level must lie in (0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto count = v.size();
  auto span = static_cast<std::size_t>(std::ceil(level * static_cast<double>(count) - 1e-9));
  span = std::clamp<std::size_t>(span, 1, count);
  std::size_t best = 0;
  for (std::size_t s = 1; s + span <= count; ++s)
    if (v[s + span - 1] - v[s] < v[best + span - 1] - v[best]) best = s;
  return {v[best], v[best + span - 1], level};
}

struct StatisticSeries {
  StatisticSpec spec;
  std::vector<std::optional<double>> values;  // one per posterior draw; nullopt = undefined
  std::size_t undefined_count = 0;
  std::optional<double> mean;
  std::optional<Interval> hpd;
  std::optional<double> ess;

  std::vector<double> defined_values() const {
    std::vector<double> out;
    for (const auto& v : values)
      if (v) out.push_back(*v);
    return out;
  }
};

inline void summarize(StatisticSeries& s, double hpd_level) {
  const auto defined = s.defined_values();
  s.undefined_count = s.values.size() - defined.size();
  s.mean.reset();
  s.hpd.reset();
  s.ess.reset();
  if (defined.empty()) return;
  double sum = 0.0;
  for (double x : defined) sum += x;
  s.mean = sum / static_cast<double>(defined.size());
  s.hpd = hpd_interval(defined, hpd_level);
  if (defined.size() >= 10) s.ess = effective_sample_size(defined);
}

struct SynthesisOptions {
  std::size_t keep_datasets = 0;
  std::size_t synthetic_n = 0;  // 0: same n as the original data
  std::uint64_t seed = 1;
  int threads = 1;
  double hpd_level = 0.98;
};

struct SynthesisResult {
  std::vector<StatisticSeries> series;
  std::vector<BinaryDataset> datasets;  // the first keep_datasets synthetic sets
};

inline constexpr std::uint64_t kSynthStream = 0x53594E5448ULL;

// For each posterior structure draw theta | G, X, then Y | G, theta, then
// every statistic on Y. Draw m uses its own RNG sub-stream, so results do not
// depend on the thread count. Y is dropped after use unless it is among the
// first keep_datasets.
inline SynthesisResult run_synthesis(const BinaryDataset& data, std::span<const Dag> structures,
                                       const HyperParams& hyper, const std::vector<StatisticSpec>& specs,
                                       const SynthesisOptions& options) {
  if (structures.empty()) usage_error("synthesis: the structure sample is empty");
  hyper.validate();
  std::vector<StatisticEvaluator> evaluators;
  for (const auto& s : specs) evaluators.emplace_back(s, data);
  const std::size_t m_total = structures.size();
  const std::size_t n = options.synthetic_n ? options.synthetic_n : data.n();
  const std::size_t keep = std::min(options.keep_datasets, m_total);

  std::vector<std::vector<std::optional<double>>> values(m_total);
  std::vector<std::optional<BinaryDataset>> kept(keep);
  parallel_for(m_total, options.threads, [&](std::size_t m) {
    if (structures[m].d() != data.d()) usage_error("synthesis: structure dimension differs from the data");
    Rng rng(derive_seed(options.seed, {kSynthStream, m}));
    const auto theta = sample_theta(structures[m], data, hyper, rng);
    auto y = ancestral_sample(theta, n, rng, data.names());
    auto& row = values[m];
    row.reserve(evaluators.size());
    for (const auto& e : evaluators) row.push_back(e.try_evaluate(y));
    if (m < keep) kept[m] = std::move(y);
  });

  SynthesisResult result;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    StatisticSeries series{evaluators[s].spec(), {}, 0, {}, {}, {}};
    series.values.reserve(m_total);
    for (std::size_t m = 0; m < m_total; ++m) series.values.push_back(values[m][s]);
    summarize(series, options.hpd_level);
    result.series.push_back(std::move(series));
  }
  for (auto& y : kept) result.datasets.push_back(std::move(*y));
  return result;
}

}  // namespace bnsynth
