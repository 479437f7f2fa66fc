// bnsynth command-line tool: fit, synth, exact, simulate, calibrate, count-dags.
//
// Every setting has a dotted key (e.g. mcmc.lag). Values come from the
// built-in default, then the INI file given by --config, then a flag of the
// same dotted name.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "bnsynth/bnsynth.hpp"

namespace fs = std::filesystem;
using namespace bnsynth;

namespace {

// Every key the tool understands, with its help text.
const std::map<std::string, std::string>& known_keys() {
  static const std::map<std::string, std::string> keys = {
      {"data", "input CSV of 0/1 observations with a header row"},
      {"out", "output directory"},
      {"threads", "worker threads (results do not depend on this)"},
      {"seed", "top-level random seed"},
      {"hyper.alpha", "Beta prior first shape"},
      {"hyper.beta", "Beta prior second shape"},
      {"prior.gamma", "structure-prior penalty (0 = uniform)"},
      {"prior.exponent", "exponent applied to parent-set sizes"},
      {"mcmc.iterations", "total Gibbs iterations"},
      {"mcmc.burn_in", "iterations discarded before retention"},
      {"mcmc.lag", "thinning interval"},
      {"mcmc.block_size", "nodes resampled jointly per iteration (1-3)"},
      {"mcmc.max_parents", "parent-set size cap"},
      {"synth.chain", "chain file (fit output) or structure-posterior release file"},
      {"synth.stats", "statistics, separated by ';' (e.g. mle:1|0=0;chi2:0,1)"},
      {"synth.keep", "synthetic datasets to retain (auto: as the release mode needs)"},
      {"synth.n", "rows per synthetic dataset (0: same as the data)"},
      {"synth.draws", "structures drawn when the input is a release posterior file"},
      {"synth.hpd_level", "HPD interval mass"},
      {"release.mode", "release output 1-5"},
      {"release.subset", "datasets released by mode 3 (5-10)"},
      {"scenario.id", "built-in scenario id"},
      {"scenario.replications", "replications to run"},
      {"scenario.methods", "S1, S2 or S1,S2"},
      {"scenario.dump_data", "directory for the simulated replication datasets"},
      {"calibrate.grid", "gamma grid start:stop:step"},
      {"calibrate.threshold", "probability the truth must exceed"},
      {"calibrate.mcmc", "allow chain-based estimates when d > 5 (true/false)"},
  };
  return keys;
}

// Raw string values for the keys; flags override the config file.
class Settings {
 public:
  void load_ini(const std::string& path) {
    if (!fs::exists(path)) io_error("cannot open config file: " + path);
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      io_error("config file " + path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto& [name, node] : tree) {
      if (node.empty()) {
        set_file(name, node.data(), path);
        continue;
      }
      for (const auto& [key, leaf] : node) set_file(name + "." + key, leaf.data(), path);
    }
  }

  void set_flag(const std::string& key, const std::string& value) { values_[key] = value; }

  std::optional<std::string> raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string text(const std::string& key, const std::string& fallback) const { return raw(key).value_or(fallback); }

  template <typename T>
  T number(const std::string& key, T fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    T out{};
    const char* first = v->data();
    const char* last = v->data() + v->size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || p != last) usage_error(key + ": expected a number, got \"" + *v + "\"");
    return out;
  }

  bool boolean(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    usage_error(key + ": expected true or false, got \"" + *v + "\"");
  }

 private:
  void set_file(const std::string& key, std::string value, const std::string& path) {
    if (!known_keys().count(key)) usage_error(path + ": unknown key \"" + key + "\"");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    values_[key] = value;
  }

  std::map<std::string, std::string> values_;
};

struct Command {
  CLI::App* app = nullptr;
  std::string config;
  std::map<std::string, std::string> flags;
  std::vector<std::string> keys;
};

void add_keys(Command& cmd, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    cmd.keys.emplace_back(k);
    cmd.app->add_option(std::string("--") + k, cmd.flags[k], known_keys().at(k));
  }
}

Settings resolve(const Command& cmd) {
  Settings s;
  if (!cmd.config.empty()) s.load_ini(cmd.config);
  for (const auto& key : cmd.keys)
    if (cmd.app->count(std::string("--") + key) > 0) s.set_flag(key, cmd.flags.at(key));
  return s;
}

// With a prefix so errors name the offending field.
template <typename F>
void checked(const std::string& field, F&& f) {
  try {
    f();
  } catch (const UndefinedStatistic&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), field + ": " + e.what());
  }
}

HyperParams hyper_of(const Settings& s) {
  HyperParams h{s.number("hyper.alpha", 1.0), s.number("hyper.beta", 1.0)};
  h.validate();
  return h;
}

PriorSpec prior_of(const Settings& s) {
  PriorSpec p{s.number("prior.gamma", 0.0), s.number("prior.exponent", 1.0)};
  p.validate();
  return p;
}

McmcConfig mcmc_of(const Settings& s, int d) {
  McmcConfig c;
  c.iterations = s.number("mcmc.iterations", c.iterations);
  c.burn_in = s.number("mcmc.burn_in", c.burn_in);
  c.lag = s.number("mcmc.lag", c.lag);
  c.block_size = s.number("mcmc.block_size", c.block_size);
  c.max_parents = s.number("mcmc.max_parents", c.max_parents);
  c.seed = s.number<std::uint64_t>("seed", 1);
  c.validate(d);
  return c;
}

int threads_of(const Settings& s) {
  const int t = s.number("threads", 1);
  if (t < 1) usage_error("threads: must be at least 1");
  return t;
}

std::string required(const Settings& s, const std::string& key) {
  auto v = s.raw(key);
  if (!v || v->empty()) usage_error(key + ": required");
  return *v;
}

fs::path out_dir(const Settings& s) {
  fs::path dir = s.text("out", ".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) io_error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) io_error("cannot write " + path.string());
  f << content;
  if (!f) io_error("write failed: " + path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) io_error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    io_error(path + ": " + e.what());
  }
}

std::vector<StatisticSpec> stats_of(const Settings& s, int d) {
  std::vector<StatisticSpec> out;
  const std::string text = s.text("synth.stats", "");
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) {
      checked("synth.stats", [&] {
        out.push_back(StatisticSpec::parse(item));
        out.back().validate(d);
      });
    }
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_fit(const Settings& s) {
  const auto data = load_csv(required(s, "data"));
  const auto hyper = hyper_of(s);
  const auto prior = prior_of(s);
  const auto config = mcmc_of(s, data.d());
  const auto chain = run_chain(data, hyper, prior, config);
  const auto dir = out_dir(s);
  write_file(dir / "chain.json", dump(chain_to_json(chain, {data.names(), data.fingerprint(), hyper, prior})));
  write_file(dir / "summary.json", dump(posterior_summary(chain, data.names())));
  std::cout << "retained " << chain.samples.size() << " structures\n"
            << "wrote " << (dir / "chain.json").string() << "\n"
            << "wrote " << (dir / "summary.json").string() << "\n";
  return 0;
}

// Structures for synthesis: the chain sample itself, or i.i.d. draws from a
// released empirical posterior.
std::vector<Dag> structures_for_synth(const Settings& s, const BinaryDataset& data, std::uint64_t seed) {
  const std::string path = required(s, "synth.chain");
  const json j = read_json(path);
  const std::string format = j.is_object() && j.contains("format") && j["format"].is_string() ? j["format"] : "";
  auto check_shape = [&](int d, const std::vector<std::string>& names) {
    if (d != data.d()) usage_error(path + ": structures have " + std::to_string(d) + " nodes but the data has " +
                                   std::to_string(data.d()) + " columns");
    if (names != data.names()) usage_error(path + ": variable names differ from the data header");
  };
  if (format == "bnsynth.release.posterior/1") {
    const auto post = empirical_from_json(j);
    check_shape(post.d, post.names);
    const long draws = s.number("synth.draws", 1000L);
    if (draws < 1) usage_error("synth.draws: must be at least 1");
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& [g, p] : post.support) cumulative.push_back(total += p);
    Rng rng(derive_seed(seed, {0x6472617773ULL}));
    std::vector<Dag> out;
    for (long i = 0; i < draws; ++i) {
      const double u = rng.uniform() * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) --it;
      out.push_back(post.support[static_cast<std::size_t>(it - cumulative.begin())].first);
    }
    return out;
  }
  const auto chain = chain_from_json(j);
  check_shape(chain.d, chain.names);
  if (j.contains("data_fingerprint") && j["data_fingerprint"] != hex64(data.fingerprint()))
    std::cerr << "warning: " << path << " was fitted on different data\n";
  return chain.samples;
}

int cmd_synth(const Settings& s) {
  const auto data = load_csv(required(s, "data"));
  const auto hyper = hyper_of(s);
  const int mode = s.number("release.mode", 5);
  if (mode < 1 || mode > 5) usage_error("release.mode: must be between 1 and 5");
  const std::uint64_t seed = s.number<std::uint64_t>("seed", 1);
  const auto structures = structures_for_synth(s, data, seed);

  ReleaseInputs in;
  in.structures = structures;
  in.names = data.names();
  in.subset_size = s.number<std::size_t>("release.subset", 5);
  SynthesisResult result;
  if (mode >= 2) {
    const auto specs = stats_of(s, data.d());
    if (mode >= 4 && specs.empty()) usage_error("synth.stats: release mode " + std::to_string(mode) + " needs at least one statistic");
    SynthesisOptions options;
    const std::string keep = s.text("synth.keep", "auto");
    if (keep == "auto") {
      options.keep_datasets = mode == 2 ? structures.size() : mode == 3 ? in.subset_size : 0;
    } else {
      options.keep_datasets = s.number<std::size_t>("synth.keep", 0);
    }
    const long n = s.number("synth.n", 0L);
    if (n < 0) usage_error("synth.n: must not be negative");
    options.synthetic_n = static_cast<std::size_t>(n);
    options.seed = seed;
    options.threads = threads_of(s);
    options.hpd_level = s.number("synth.hpd_level", 0.98);
    if (!(options.hpd_level > 0.0 && options.hpd_level < 1.0)) usage_error("synth.hpd_level: must lie in (0, 1)");
    result = run_synthesis(data, structures, hyper, specs, options);
    in.synth = &result;
  }
  const auto files = release_output(mode, in);
  const auto dir = out_dir(s);
  std::cout << "release mode " << mode << ": " << files.size() << " file(s)\n";
  for (const auto& f : files) {
    write_file(dir / f.name, f.content);
    std::cout << "  " << (dir / f.name).string() << "\n";
  }
  return 0;
}

int cmd_exact(const Settings& s) {
  threads_of(s);  // validated only; enumeration is sequential
  const auto data = load_csv(required(s, "data"));
  const auto hyper = hyper_of(s);
  const auto prior = prior_of(s);
  const int k = s.number("mcmc.max_parents", 3);
  if (k < 1 && data.d() > 1) usage_error("mcmc.max_parents: must be at least 1");
  const auto post = exact_posterior(data, hyper, prior, std::min(k, data.d() - 1));
  const auto dir = out_dir(s);
  write_file(dir / "exact.json", dump(exact_to_json(post, data.names(), hyper, prior)));
  std::cout << post.entries.size() << " structures, " << post.classes.size() << " equivalence classes\n"
            << "wrote " << (dir / "exact.json").string() << "\n";
  return 0;
}

Scenario scenario_of(const Settings& s) {
  Scenario sc = find_scenario(required(s, "scenario.id"));
  sc.replications = s.number("scenario.replications", sc.replications);
  // A top-level seed replaces the shipped one; theta is redrawn from it.
  if (s.raw("seed")) {
    sc.seed = s.number<std::uint64_t>("seed", sc.seed);
    sc.theta_truth = draw_theta_truth(sc.truth, sc.seed);
  }
  sc.validate();
  return sc;
}

MethodSet methods_of(const Settings& s) {
  MethodSet m;
  std::string text = s.text("scenario.methods", "S1,S2");
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item == "S1" || item == "s1") {
      m.s1 = true;
    } else if (item == "S2" || item == "s2") {
      m.s2 = true;
    } else if (!item.empty()) {
      usage_error("scenario.methods: unknown method \"" + item + "\" (S1, S2)");
    }
  }
  return m;
}

int cmd_simulate(const Settings& s) {
  const auto sc = scenario_of(s);
  const auto hyper = hyper_of(s);
  const auto prior = prior_of(s);
  const auto config = mcmc_of(s, sc.d);
  ExperimentOptions options;
  options.threads = threads_of(s);
  options.hpd_level = s.number("synth.hpd_level", 0.98);
  const auto report = run_scenario(sc, prior, hyper, config, methods_of(s), options);
  const auto dir = out_dir(s);
  write_file(dir / (sc.id + ".json"), dump(scenario_report_to_json(report)));
  write_file(dir / (sc.id + ".csv"), scenario_report_csv(report));
  if (auto dump_dir = s.raw("scenario.dump_data")) {
    fs::create_directories(*dump_dir);
    for (int r = 0; r < sc.replications; ++r) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_rep%02d.csv", sc.id.c_str(), r);
      write_file(fs::path(*dump_dir) / name, to_csv(simulate_replication(sc, r)));
    }
  }
  std::cout << sc.id << ": truth is the posterior mode in " << report.mode_count() << "/" << sc.replications
            << " replications\n"
            << "wrote " << (dir / (sc.id + ".json")).string() << "\n"
            << "wrote " << (dir / (sc.id + ".csv")).string() << "\n";
  return 0;
}

int cmd_calibrate(const Settings& s) {
  const auto sc = scenario_of(s);
  const auto hyper = hyper_of(s);
  std::vector<double> grid;
  checked("calibrate.grid", [&] { grid = parse_grid(s.text("calibrate.grid", "0:10:0.5")); });
  const double threshold = s.number("calibrate.threshold", 0.85);
  if (!(threshold > 0.0 && std::isfinite(threshold))) usage_error("calibrate.threshold: must be positive");
  CalibrationOptions options;
  options.threads = threads_of(s);
  options.allow_mcmc = s.boolean("calibrate.mcmc", false);
  options.max_parents = s.number("mcmc.max_parents", 3);
  options.exponent = s.number("prior.exponent", 1.0);
  if (options.allow_mcmc) options.mcmc = mcmc_of(s, sc.d);
  const auto result = calibrate_gamma(sc, grid, threshold, hyper, options);
  const auto dir = out_dir(s);
  const auto path = dir / ("calibration_" + sc.id + ".json");
  write_file(path, dump(calibration_to_json(sc, result)));
  std::cout << "gamma* = ";
  if (result.gamma_star) {
    std::cout << *result.gamma_star << "\n";
  } else {
    std::cout << "none (threshold not exceeded on the grid)\n";
  }
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_count_dags(int d) {
  if (d < 1) usage_error("count-dags: d must be at least 1");
  if (d > 64) usage_error("count-dags: d must be at most 64");
  for (int i = 1; i <= d; ++i) std::cout << i << "\t" << with_separators(count_dags(i)) << "\n";
  return 0;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::usage:
    case ErrorKind::io: return 2;
    case ErrorKind::computation:
    case ErrorKind::undefined: return 1;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian-network synthetic data: structure posterior, release outputs and experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bnsynth 1.0.0");

  std::vector<Command> commands;
  commands.reserve(5);
  auto make = [&](const char* name, const char* help, std::initializer_list<const char*> keys) -> Command& {
    commands.emplace_back();
    Command& c = commands.back();
    c.app = app.add_subcommand(name, help);
    c.app->add_option("--config", c.config, "INI file with the settings of record")->check(CLI::ExistingFile);
    add_keys(c, keys);
    return c;
  };
  const auto common = {"hyper.alpha", "hyper.beta", "prior.gamma", "prior.exponent"};
  const auto mcmc = {"mcmc.iterations", "mcmc.burn_in", "mcmc.lag", "mcmc.block_size", "mcmc.max_parents"};

  Command& fit = make("fit", "sample the structure posterior with blocked Gibbs", {"data", "out", "threads", "seed"});
  add_keys(fit, common);
  add_keys(fit, mcmc);
  Command& synth = make("synth", "generate synthetic data and release outputs from a structure sample",
                        {"data", "out", "threads", "seed", "hyper.alpha", "hyper.beta", "synth.chain", "synth.stats",
                         "synth.keep", "synth.n", "synth.draws", "synth.hpd_level", "release.mode", "release.subset"});
  Command& exact = make("exact", "enumerate the exact structure posterior (d <= 5)",
                        {"data", "out", "threads", "mcmc.max_parents"});
  add_keys(exact, common);
  Command& simulate = make("simulate", "run a built-in simulation scenario",
                           {"out", "threads", "seed", "scenario.id", "scenario.replications", "scenario.methods",
                            "scenario.dump_data", "synth.hpd_level"});
  add_keys(simulate, common);
  add_keys(simulate, mcmc);
  Command& calibrate =
      make("calibrate", "calibrate the structure-prior penalty on a scenario",
           {"out", "threads", "seed", "scenario.id", "scenario.replications", "calibrate.grid", "calibrate.threshold",
            "calibrate.mcmc", "hyper.alpha", "hyper.beta", "prior.exponent"});
  add_keys(calibrate, mcmc);

  int count_d = 0;
  CLI::App* count = app.add_subcommand("count-dags", "print the number of labeled DAGs on 1..d nodes");
  count->add_option("d", count_d, "largest number of nodes")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (count->parsed()) return cmd_count_dags(count_d);
    if (fit.app->parsed()) return cmd_fit(resolve(fit));
    if (synth.app->parsed()) return cmd_synth(resolve(synth));
    if (exact.app->parsed()) return cmd_exact(resolve(exact));
    if (simulate.app->parsed()) return cmd_simulate(resolve(simulate));
    if (calibrate.app->parsed()) return cmd_calibrate(resolve(calibrate));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
