#pragma once

// The five release outputs, simplest first:
//   1  empirical posterior of the structure
//   2  all M synthetic datasets
//   3  a subset of 5 to 10 synthetic datasets
//   4  the posterior-predictive samples of each statistic
//   5  predictive mean and HPD interval of each statistic

#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "bnsynth/report.hpp"
#include "bnsynth/synth.hpp"

namespace bnsynth {

struct ReleaseFile {
  std::string name;
  std::string content;
};

struct ReleaseInputs {
  std::span<const Dag> structures;
  std::vector<std::string> names;
  const SynthesisResult* synth = nullptr;  // required for modes 2-5
  std::size_t subset_size = 5;              // mode 3
};

inline std::string dataset_file_name(std::size_t index) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "synthetic_%04zu.csv", index + 1);
  return buf;
}

inline std::vector<ReleaseFile> release_output(int mode, const ReleaseInputs& in) {
  if (mode < 1 || mode > 5) usage_error("release mode must be between 1 and 5");
  if (mode >= 2 && !in.synth) usage_error("release mode " + std::to_string(mode) + " needs synthetic-data results");
  std::vector<ReleaseFile> files;
  switch (mode) {
    case 1: {
      if (in.structures.empty()) usage_error("release mode 1: empty structure sample");
      json j = {{"format", "bnsynth.release.posterior/1"},
                {"d", in.structures.front().d()},
                {"names", in.names},
                {"samples", in.structures.size()},
                {"posterior", empirical_distribution(in.structures)}};
      files.push_back({"posterior.json", j.dump(2) + "\n"});
      break;
    }
    case 2: {
      if (in.synth->datasets.size() != in.structures.size())
        usage_error("release mode 2 needs all " + std::to_string(in.structures.size()) +
                    " synthetic datasets retained (set synth.keep accordingly); only " +
                    std::to_string(in.synth->datasets.size()) + " were kept");
      for (std::size_t i = 0; i < in.synth->datasets.size(); ++i)
        files.push_back({dataset_file_name(i), to_csv(in.synth->datasets[i])});
      break;
    }
    case 3: {
      if (in.subset_size < 5 || in.subset_size > 10) usage_error("release mode 3: subset size must be between 5 and 10");
      if (in.synth->datasets.size() < in.subset_size)
        usage_error("release mode 3 needs " + std::to_string(in.subset_size) +
                    " retained synthetic datasets; only " + std::to_string(in.synth->datasets.size()) + " were kept");
      for (std::size_t i = 0; i < in.subset_size; ++i)
        files.push_back({dataset_file_name(i), to_csv(in.synth->datasets[i])});
      break;
    }
    case 4: {
      json series = json::array();
      for (const auto& s : in.synth->series) series.push_back(series_values_json(s));
      json j = {{"format", "bnsynth.release.samples/1"}, {"draws", in.structures.size()}, {"series", std::move(series)}};
      files.push_back({"statistics.json", j.dump(2) + "\n"});
      break;
    }
    case 5: {
      json series = json::array();
      for (const auto& s : in.synth->series) series.push_back(series_summary_json(s));
      json j = {{"format", "bnsynth.release.summary/1"}, {"draws", in.structures.size()}, {"series", std::move(series)}};
      files.push_back({"summary.json", j.dump(2) + "\n"});
      break;
    }
  }
  return files;
}

}  // namespace bnsynth
