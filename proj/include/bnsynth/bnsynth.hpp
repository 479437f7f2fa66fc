#pragma once

#include "bnsynth/dag.hpp"
#include "bnsynth/dataset.hpp"
#include "bnsynth/error.hpp"
#include "bnsynth/exact.hpp"
#include "bnsynth/experiments.hpp"
#include "bnsynth/mcmc.hpp"
#include "bnsynth/parallel.hpp"
#include "bnsynth/random.hpp"
#include "bnsynth/release.hpp"
#include "bnsynth/report.hpp"
#include "bnsynth/s2.hpp"
#include "bnsynth/score.hpp"
#include "bnsynth/special_functions.hpp"
#include "bnsynth/synth.hpp"
#include "bnsynth/utility.hpp"
