#include "pcurve/simulate.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "pcurve/normal.hpp"
#include "pcurve/rng.hpp"

namespace pcurve {

HackingModel HackingModel::spec_search(int m, bool shared) {
  if (m < 2)
    throw std::invalid_argument("spec_search: need at least two analyses");
  HackingModel h;
  h.kind = Kind::spec_search;
  h.rounds = m;
  h.shared_effect = shared;
  return h;
}

double hacked_pcurve(const PCurveSpec& spec, int m, double p) {
  if (m < 1) throw std::invalid_argument("hacked_pcurve: m must be >= 1");
  const double g = pcurve_density(spec, p);
  if (m == 1) return g;
  const double survivor = 1.0 - pcurve_cdf(spec, p);
  return static_cast<double>(m) * std::pow(survivor, m - 1) * g;
}

namespace {

double p_of_stat(int s, double stat) {
  double p = (s == 1) ? normal_sf(stat) : 2.0 * normal_sf(std::abs(stat));
  if (p <= 0.0) p = DBL_MIN; // deep-tail underflow guard
  if (p > 1.0) p = 1.0;
  return p;
}

double one_study(const PCurveSpec& spec, const HackingModel& hacking, int s,
                 Rng& rng) {
  if (hacking.kind == HackingModel::Kind::none) {
    const double h = spec.effects.sample(rng);
    return p_of_stat(s, h + rng.normal());
  }
  double best = 2.0;
  double shared_h = 0.0;
  if (hacking.shared_effect) shared_h = spec.effects.sample(rng);
  for (int j = 0; j < hacking.rounds; ++j) {
    const double h =
        hacking.shared_effect ? shared_h : spec.effects.sample(rng);
    best = std::min(best, p_of_stat(s, h + rng.normal()));
  }
  return best;
}

} // namespace

PValueSample draw_pvalues(const PCurveSpec& spec, const HackingModel& hacking,
                          long n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("draw_pvalues: n must be positive");
  const int s = family_index(spec.family);
  PValueSample out;
  out.values.resize(static_cast<std::size_t>(n));
  out.origin.assign(static_cast<std::size_t>(n), PValueOrigin::reported_p);
  for (long i = 0; i < n; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    out.values[static_cast<std::size_t>(i)] = one_study(spec, hacking, s, rng);
  }
  return out;
}

McResult run_mc_study(const McStudy& study) {
  if (study.R < 1) throw std::invalid_argument("run_mc_study: R must be >= 1");
  for (double level : study.levels)
    if (!(level > 0.0) || !(level < 1.0))
      throw std::invalid_argument("run_mc_study: levels must be in (0,1)");

  BatteryOptions opts = study.battery;
  const std::vector<std::string>& names =
      opts.tests.empty() ? battery_test_names() : opts.tests;
  const bool needs_cs2b =
      std::find(names.begin(), names.end(), "cs2b") != names.end();
  const bool needs_lcm =
      std::find(names.begin(), names.end(), "lcm") != names.end();

  // hoist the expensive shared assets out of the replication loop
  std::vector<BinBoundTable> tables;
  if (needs_cs2b && opts.bound_tables == nullptr) {
    const BinningScheme binning(opts.J, opts.alpha);
    for (int k = 0; k <= opts.K; ++k)
      tables.push_back(make_bin_bound_table(opts.family, binning, k));
    opts.bound_tables = &tables;
  }
  if (needs_lcm && opts.lcm_table == nullptr)
    opts.lcm_table = &default_lcm_table();

  std::map<std::string, std::map<double, long>> rejects;
  std::map<std::string, long> ok_count;
  McResult mc;
  for (const auto& name : names) {
    ok_count[name] = 0;
    mc.failures[name] = 0;
    mc.not_applicable[name] = 0;
    for (double level : study.levels) rejects[name][level] = 0;
  }

  for (int r = 0; r < study.R; ++r) {
    const std::uint64_t rep_seed =
        Rng::mix64(study.seed + static_cast<std::uint64_t>(r) + 1);
    const PValueSample sample =
        draw_pvalues(study.spec, study.hacking, study.n, rep_seed);
    const std::vector<TestResult> results = run_battery(sample, opts);
    for (const auto& res : results) {
      if (res.notes.count("error")) {
        ++mc.failures[res.test];
        continue;
      }
      ++ok_count[res.test];
      if (res.not_applicable) ++mc.not_applicable[res.test];
      for (double level : study.levels)
        if (res.p_value < level) ++rejects[res.test][level];
    }
  }

  for (const auto& name : names) {
    const long den = ok_count[name];
    for (double level : study.levels) {
      McRateRow row;
      row.test = name;
      row.level = level;
      row.R = study.R;
      row.n = study.n;
      if (den > 0) {
        row.rate = static_cast<double>(rejects[name][level]) /
                   static_cast<double>(den);
        row.mc_se =
            std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(den));
      }
      mc.rows.push_back(std::move(row));
    }
  }
  return mc;
}

LcmQuantileTable brownian_bridge_sup_draws(int m, int R, std::uint64_t seed) {
  if (m < 100)
    throw std::invalid_argument("brownian_bridge_sup_draws: m must be >= 100");
  if (R < 1000)
    throw std::invalid_argument(
        "brownian_bridge_sup_draws: R must be >= 1000");

  std::vector<double> grid(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i)
    grid[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / static_cast<double>(m);

  const double step_sd = std::sqrt(1.0 / static_cast<double>(m));
  std::vector<double> path(static_cast<std::size_t>(m) + 1);
  std::vector<double> draws(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    path[0] = 0.0;
    double w = 0.0;
    for (int i = 1; i <= m; ++i) {
      w += step_sd * rng.normal();
      path[static_cast<std::size_t>(i)] = w;
    }
    const double w_final = path[static_cast<std::size_t>(m)];
    for (int i = 0; i <= m; ++i)
      path[static_cast<std::size_t>(i)] -= grid[static_cast<std::size_t>(i)] * w_final;

    const PiecewiseLinear hull = upper_concave_hull(grid, path);
    // walk hull segments and grid points together; interpolation matches
    // PiecewiseLinear::operator() exactly
    double sup = 0.0;
    std::size_t seg = 0;
    for (int i = 0; i <= m; ++i) {
      const double t = grid[static_cast<std::size_t>(i)];
      while (seg + 2 < hull.x.size() && hull.x[seg + 1] <= t) ++seg;
      double value;
      if (t <= hull.x.front())
        value = hull.y.front();
      else if (t >= hull.x.back())
        value = hull.y.back();
      else
        value = hull.y[seg] + (hull.y[seg + 1] - hull.y[seg]) *
                                  ((t - hull.x[seg]) /
                                   (hull.x[seg + 1] - hull.x[seg]));
      sup = std::max(sup, value - path[static_cast<std::size_t>(i)]);
    }
    draws[static_cast<std::size_t>(r)] = sup;
  }
  std::sort(draws.begin(), draws.end());

  LcmQuantileTable table;
  table.m = m;
  table.R = R;
  table.seed = seed;
  table.sorted_draws = std::move(draws);
  table.levels = {0.80, 0.90, 0.95, 0.99};
  table.quantiles.reserve(table.levels.size());
  for (double level : table.levels)
    table.quantiles.push_back(table.quantile(level));
  return table;
}

} // namespace pcurve
