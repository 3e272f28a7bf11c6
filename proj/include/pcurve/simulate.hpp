#pragma once

#include <cstdint>
#include <utility>
#include <map>
#include <string>
#include <vector>

#include "pcurve/hypothesis_tests.hpp"
#include "pcurve/null_model.hpp"

namespace pcurve {

struct HackingModel {
  enum class Kind { none, spec_search };

  Kind kind = Kind::none;
  int rounds = 1;          // M: number of independent analyses, report min p
  bool shared_effect = false; // all M analyses share one draw of h

  static HackingModel none() { return HackingModel{}; }
  static HackingModel spec_search(int m, bool shared = false);
};

// density of min(p_1..p_M) when each p_i is an i.i.d. draw from the p-curve
double hacked_pcurve(const PCurveSpec& spec, int m, double p);

// one study per index i, driven by stream i of the seed; reproducible and
// order-independent
PValueSample draw_pvalues(const PCurveSpec& spec, const HackingModel& hacking,
                          long n, std::uint64_t seed);

struct McStudy {
  McStudy(PCurveSpec spec_, HackingModel hacking_)
      : spec(std::move(spec_)), hacking(hacking_) {}

  PCurveSpec spec;
  HackingModel hacking;
  long n = 1000;
  int R = 500;
  std::uint64_t seed = 1;
  BatteryOptions battery;
  std::vector<double> levels = {0.01, 0.05, 0.10};
};

struct McRateRow {
  std::string test;
  double level = 0.0;
  double rate = 0.0;
  double mc_se = 0.0;
  int R = 0;
  long n = 0;
};

struct McResult {
  std::vector<McRateRow> rows;
  std::map<std::string, long> failures;       // replications that errored out
  std::map<std::string, long> not_applicable; // valid non-rejections
};

McResult run_mc_study(const McStudy& study);

// sup_t (MB)(t) - B(t) for a Brownian bridge on an (m+1)-point uniform grid
LcmQuantileTable brownian_bridge_sup_draws(int m, int R, std::uint64_t seed);

} // namespace pcurve
