#pragma once

// JSON renderings of the library's results. Field layouts are documented in
// docs/formats.md and checked against docs/schemas/.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnsynth/dag.hpp"
#include "bnsynth/exact.hpp"
#include "bnsynth/mcmc.hpp"
#include "bnsynth/s2.hpp"
#include "bnsynth/score.hpp"
#include "bnsynth/synth.hpp"
#include "bnsynth/utility.hpp"

namespace bnsynth {

using json = nlohmann::ordered_json;

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json to_json(const Interval& i) { return {{"low", i.low}, {"high", i.high}, {"level", i.level}}; }

inline json to_json(const HyperParams& h) { return {{"alpha", h.alpha}, {"beta", h.beta}}; }

inline json to_json(const PriorSpec& p) { return {{"gamma", p.gamma}, {"exponent", p.exponent}}; }

inline json to_json(const McmcConfig& c) {
  return {{"iterations", c.iterations}, {"burn_in", c.burn_in},       {"lag", c.lag},
          {"block_size", c.block_size}, {"max_parents", c.max_parents}, {"candidate_ceiling", c.candidate_ceiling}};
}

// Empirical distribution of a structure sample: encoding -> frequency,
// encodings in ascending order.
inline json empirical_distribution(std::span<const Dag> samples) {
  std::map<std::string, std::size_t> counts;
  for (const auto& g : samples) ++counts[encode(g)];
  json out = json::object();
  for (const auto& [enc, c] : counts) out[enc] = static_cast<double>(c) / static_cast<double>(samples.size());
  return out;
}

// Class frequencies of a sample, sorted descending (ties by key).
inline std::vector<ClassEntry> empirical_classes(std::span<const Dag> samples) {
  std::map<EquivalenceKey, std::pair<double, int>> by_key;
  std::map<std::string, bool> seen;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const auto& g : samples) {
    auto& slot = by_key[equivalence_key(g)];
    slot.first += w;
    if (!seen[encode(g)]) {
      seen[encode(g)] = true;
      slot.second += 1;
    }
  }
  return sorted_classes(by_key);
}

struct ChainContext {
  std::vector<std::string> names;
  std::uint64_t data_fingerprint = 0;
  HyperParams hyper;
  PriorSpec prior;
};

inline json chain_to_json(const ChainOutput& chain, const ChainContext& ctx) {
  json samples = json::array();
  for (const auto& g : chain.samples) samples.push_back(encode(g));
  return {{"format", "bnsynth.chain/1"},
          {"d", chain.d},
          {"names", ctx.names},
          {"data_fingerprint", hex64(ctx.data_fingerprint)},
          {"hyper", to_json(ctx.hyper)},
          {"prior", to_json(ctx.prior)},
          {"config", to_json(chain.config)},
          {"seed", chain.seed},
          {"state_changes", chain.state_changes},
          {"samples", std::move(samples)},
          {"log_posterior", chain.log_posterior}};
}

struct LoadedChain {
  int d = 0;
  std::vector<std::string> names;
  std::vector<Dag> samples;
};

inline LoadedChain chain_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "bnsynth.chain/1") usage_error("not a chain file (format field)");
    LoadedChain out;
    out.d = j.at("d").get<int>();
    out.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& s : j.at("samples")) out.samples.push_back(decode(s.get<std::string>(), out.d));
    if (out.samples.empty()) usage_error("chain file holds no samples");
    return out;
  } catch (const json::exception& e) {
    io_error(std::string("malformed chain file: ") + e.what());
  }
}

// Mode-1 release file back into a weighted structure list.
struct EmpiricalPosterior {
  int d = 0;
  std::vector<std::string> names;
  std::vector<std::pair<Dag, double>> support;  // ascending encoding
};

inline EmpiricalPosterior empirical_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "bnsynth.release.posterior/1")
      usage_error("not a structure-posterior release file (format field)");
    EmpiricalPosterior out;
    out.d = j.at("d").get<int>();
    out.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& [enc, p] : j.at("posterior").items()) out.support.emplace_back(decode(enc, out.d), p.get<double>());
    if (out.support.empty()) usage_error("posterior release file has empty support");
    return out;
  } catch (const json::exception& e) {
    io_error(std::string("malformed posterior release file: ") + e.what());
  }
}

inline json class_to_json(const ClassEntry& c) {
  return {{"key", c.key.to_string()}, {"probability", c.probability}, {"members", c.members}};
}

// Top-10 equivalence classes and the ESS of the log-posterior trace.
inline json posterior_summary(const ChainOutput& chain, const std::vector<std::string>& names) {
  const auto classes = empirical_classes(chain.samples);
  json top = json::array();
  for (std::size_t i = 0; i < classes.size() && i < 10; ++i) top.push_back(class_to_json(classes[i]));
  std::optional<double> ess;
  if (chain.log_posterior.size() >= 10) ess = effective_sample_size(chain.log_posterior);
  const auto best = top_dag(chain.samples);
  return {{"format", "bnsynth.summary/1"},
          {"d", chain.d},
          {"names", names},
          {"retained", chain.samples.size()},
          {"distinct_dags", empirical_distribution(chain.samples).size()},
          {"distinct_classes", classes.size()},
          {"top_dag", encode(best)},
          {"top_classes", std::move(top)},
          {"log_posterior_ess", optional_json(ess)}};
}

inline json exact_to_json(const ExactPosterior& post, const std::vector<std::string>& names,
                          const HyperParams& hyper, const PriorSpec& prior) {
  json entries = json::array();
  for (const auto& e : post.entries)
    entries.push_back({{"dag", e.encoding},
                       {"class", e.key.to_string()},
                       {"log_weight", e.log_weight},
                       {"probability", e.probability}});
  json classes = json::array();
  for (const auto& c : post.classes) classes.push_back(class_to_json(c));
  return {{"format", "bnsynth.exact/1"},
          {"d", post.d},
          {"names", names},
          {"max_parents", post.max_parents},
          {"hyper", to_json(hyper)},
          {"prior", to_json(prior)},
          {"log_normalizer", post.log_normalizer},
          {"entries", std::move(entries)},
          {"classes", std::move(classes)}};
}

inline json series_summary_json(const StatisticSeries& s) {
  return {{"statistic", s.spec.label()},
          {"draws", s.values.size()},
          {"undefined", s.undefined_count},
          {"mean", optional_json(s.mean)},
          {"hpd_low", s.hpd ? json(s.hpd->low) : json(nullptr)},
          {"hpd_high", s.hpd ? json(s.hpd->high) : json(nullptr)},
          {"hpd_level", s.hpd ? json(s.hpd->level) : json(nullptr)},
          {"ess", optional_json(s.ess)}};
}

inline json series_values_json(const StatisticSeries& s) {
  json values = json::array();
  for (const auto& v : s.values) values.push_back(optional_json(v));
  return {{"statistic", s.spec.label()}, {"undefined", s.undefined_count}, {"values", std::move(values)}};
}

inline json s2_to_json(const S2Result& r) {
  return {{"statistic", r.spec.label()},
          {"values", r.values},
          {"point", r.estimate.point},
          {"interval", to_json(r.estimate.interval)}};
}

}  // namespace bnsynth
