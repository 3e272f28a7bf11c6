#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcurve/bounds.hpp"
#include "pcurve/ingest.hpp"
#include "pcurve/json_io.hpp"
#include "pcurve/null_model.hpp"
#include "pcurve/rng.hpp"
#include "pcurve/simulate.hpp"
#include "pcurve/version.hpp"

namespace {

using nlohmann::ordered_json;
using namespace pcurve;

// shortest round-trip representation, stable across runs
std::string num(double x) { return nlohmann::json(x).dump(); }

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  f << text;
}

TestFamily family_from_name(const std::string& name) {
  if (name == "one_sided_t") return TestFamily::one_sided_t;
  if (name == "two_sided_t") return TestFamily::two_sided_t;
  throw std::runtime_error("unknown family '" + name +
                           "' (expected one_sided_t or two_sided_t)");
}

EffectDistribution effect_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "point_mass")
    return EffectDistribution::point_mass(j.at("h").get<double>());
  if (kind == "normal")
    return EffectDistribution::normal(j.at("mu").get<double>(),
                                      j.at("sigma").get<double>());
  if (kind == "half_normal")
    return EffectDistribution::half_normal(j.at("sigma").get<double>());
  if (kind == "discrete")
    return EffectDistribution::discrete(
        j.at("atoms").get<std::vector<double>>(),
        j.at("weights").get<std::vector<double>>());
  if (kind == "mixture") {
    std::vector<EffectDistribution> parts;
    for (const auto& c : j.at("components")) parts.push_back(effect_from_json(c));
    return EffectDistribution::mixture(
        j.at("weights").get<std::vector<double>>(), std::move(parts));
  }
  throw std::runtime_error("unknown effect kind '" + kind + "'");
}

int emit_input_error(const std::string& command, const std::string& message,
                     const IngestReport* rep, const std::string& out_path) {
  ordered_json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["error"] = message;
  if (rep != nullptr) {
    ordered_json ing;
    ing["total_rows"] = rep->total_rows;
    ing["parsed_rows"] = rep->parsed_rows;
    ordered_json errs = ordered_json::array();
    const std::size_t cap = 50;
    for (std::size_t i = 0; i < rep->errors.size() && i < cap; ++i)
      errs.push_back({{"line", rep->errors[i].line},
                      {"reason", rep->errors[i].reason}});
    ing["errors"] = errs;
    ing["errors_truncated"] = rep->errors.size() > cap;
    j["ingest"] = ing;
  }
  try {
    write_output(j.dump(2) + "\n", out_path);
  } catch (const std::exception& e) {
    std::cerr << "pcurve: " << e.what() << "\n";
  }
  return 2;
}

struct TestArgs {
  std::string input;
  double alpha = 0.15;
  int bins = 30;
  bool bins_explicit = false;
  int orders = 2;
  std::vector<std::string> tests;
  std::string family = "two_sided_t";
  bool deround_flag = false;
  bool subsample = false;
  bool cluster_robust = false;
  bool ridge = false;
  double fisher_alpha = 0.05;
  double disc_threshold = 0.05;
  std::uint64_t seed = 1;
  std::string out;
  CsvOptions csv;
};

int cmd_test(const TestArgs& a) {
  IngestReport rep;
  PValueSample sample;
  try {
    sample = read_csv(a.input, a.csv, &rep);
  } catch (const std::exception& e) {
    return emit_input_error("test", e.what(), &rep, a.out);
  }
  const long n_ingested = static_cast<long>(sample.size());

  try {
    if (a.deround_flag) sample = deround(sample, Rng::mix64(a.seed + 1));
    if (a.subsample) sample = cluster_subsample(sample, Rng::mix64(a.seed + 2));

    const int bins = (a.bins_explicit || !a.subsample) ? a.bins : 15;
    BatteryOptions opts;
    opts.alpha = a.alpha;
    opts.J = bins;
    opts.K = a.orders;
    opts.family = family_from_name(a.family);
    opts.tests = a.tests;
    opts.cluster_robust = a.cluster_robust;
    opts.ridge = a.ridge;
    opts.fisher_alpha = a.fisher_alpha;
    opts.discontinuity_threshold = a.disc_threshold;
    const std::vector<TestResult> results = run_battery(sample, opts);

    ordered_json config;
    config["input"] = a.input;
    config["alpha"] = a.alpha;
    config["bins"] = bins;
    config["orders"] = a.orders;
    config["family"] = a.family;
    config["tests"] = opts.tests.empty() ? battery_test_names() : opts.tests;
    config["deround"] = a.deround_flag;
    config["cluster_subsample"] = a.subsample;
    config["cluster_robust"] = a.cluster_robust;
    config["ridge"] = a.ridge;
    config["fisher_alpha"] = a.fisher_alpha;
    config["discontinuity_threshold"] = a.disc_threshold;
    config["seed"] = a.seed;

    ordered_json report;
    report["version"] = kVersion;
    report["command"] = "test";
    report["config"] = config;
    ordered_json ing;
    ing["total_rows"] = rep.total_rows;
    ing["parsed_rows"] = rep.parsed_rows;
    ing["rejected_rows"] = static_cast<long>(rep.errors.size());
    ing["n_after_transforms"] = static_cast<long>(sample.size());
    ing["n_ingested"] = n_ingested;
    report["ingest"] = ing;
    report["summary"] = to_json(summarize(sample));
    ordered_json results_json = ordered_json::array();
    for (const auto& r : results) results_json.push_back(to_json(r));
    report["results"] = results_json;
    write_output(report.dump(2) + "\n", a.out);
    return 0;
  } catch (const std::exception& e) {
    return emit_input_error("test", e.what(), nullptr, a.out);
  }
}

BatteryOptions battery_from_json(const nlohmann::json& j) {
  BatteryOptions opts;
  if (j.contains("alpha")) opts.alpha = j.at("alpha").get<double>();
  if (j.contains("J")) opts.J = j.at("J").get<int>();
  if (j.contains("K")) opts.K = j.at("K").get<int>();
  if (j.contains("family"))
    opts.family = family_from_name(j.at("family").get<std::string>());
  if (j.contains("tests"))
    opts.tests = j.at("tests").get<std::vector<std::string>>();
  if (j.contains("cluster_robust"))
    opts.cluster_robust = j.at("cluster_robust").get<bool>();
  if (j.contains("ridge")) opts.ridge = j.at("ridge").get<bool>();
  if (j.contains("fisher_alpha"))
    opts.fisher_alpha = j.at("fisher_alpha").get<double>();
  if (j.contains("discontinuity_threshold"))
    opts.discontinuity_threshold =
        j.at("discontinuity_threshold").get<double>();
  return opts;
}

int cmd_simulate(const std::string& config_path, const std::string& out) {
  nlohmann::json cfg;
  {
    std::ifstream in(config_path);
    if (!in) return emit_input_error(
        "simulate", "cannot open config '" + config_path + "'", nullptr, out);
    try {
      in >> cfg;
    } catch (const std::exception& e) {
      return emit_input_error("simulate", e.what(), nullptr, out);
    }
  }
  try {
    const TestFamily family =
        family_from_name(cfg.value("family", std::string("two_sided_t")));
    const EffectDistribution effects = effect_from_json(cfg.at("effects"));
    const bool allow_signed = cfg.value("allow_signed_effects", false);
    const PCurveSpec spec(family, effects, std::nullopt, allow_signed);

    HackingModel hacking = HackingModel::none();
    if (cfg.contains("hacking")) {
      const auto& h = cfg.at("hacking");
      const std::string kind = h.value("kind", std::string("none"));
      if (kind == "spec_search")
        hacking = HackingModel::spec_search(h.at("M").get<int>(),
                                            h.value("shared_effect", false));
      else if (kind != "none")
        throw std::runtime_error("unknown hacking kind '" + kind + "'");
    }

    McStudy study{spec, hacking};
    study.n = cfg.value("n", 1000L);
    study.R = cfg.value("R", 500);
    study.seed = cfg.value("seed", std::uint64_t{1});
    if (cfg.contains("levels"))
      study.levels = cfg.at("levels").get<std::vector<double>>();
    LcmQuantileTable lcm_table;
    if (cfg.contains("battery")) {
      study.battery = battery_from_json(cfg.at("battery"));
      if (cfg.at("battery").contains("lcm")) {
        const auto& l = cfg.at("battery").at("lcm");
        lcm_table = load_or_make_lcm_table(l.value("m", 1000),
                                           l.value("R", 10000),
                                           l.value("seed", std::uint64_t{8675309}));
        study.battery.lcm_table = &lcm_table;
      }
    }

    const McResult result = run_mc_study(study);

    std::ostringstream csv;
    csv << "# pcurve " << kVersion << " simulate\n";
    csv << "# config " << nlohmann::json(cfg).dump() << "\n";
    bool any_fail = false, any_na = false;
    for (const auto& [k, v] : result.failures) any_fail |= v > 0;
    for (const auto& [k, v] : result.not_applicable) any_na |= v > 0;
    if (any_fail) {
      csv << "# failures";
      for (const auto& [k, v] : result.failures)
        if (v > 0) csv << " " << k << "=" << v;
      csv << "\n";
    }
    if (any_na) {
      csv << "# not_applicable";
      for (const auto& [k, v] : result.not_applicable)
        if (v > 0) csv << " " << k << "=" << v;
      csv << "\n";
    }
    csv << "test,level,rate,mc_se,R,n\n";
    for (const auto& row : result.rows)
      csv << row.test << "," << num(row.level) << "," << num(row.rate) << ","
          << num(row.mc_se) << "," << row.R << "," << row.n << "\n";
    write_output(csv.str(), out);
    return 0;
  } catch (const std::exception& e) {
    return emit_input_error("simulate", e.what(), nullptr, out);
  }
}

int cmd_bounds(const std::string& family_name, double alpha, int bins,
               int orders, double sigma, double pmax, int points,
               const std::string& theta_out, const std::string& out) {
  try {
    const TestFamily family = family_from_name(family_name);
    const BinningScheme binning(bins, alpha);

    if (!theta_out.empty()) {
      std::ostringstream tcsv;
      tcsv << "# pcurve " << kVersion << " bounds theta table family="
           << family_name << " alpha=" << num(alpha) << " J=" << bins
           << " K=" << orders << "\n";
      tcsv << "k,j,lower_edge,upper_edge,theta\n";
      for (int k = 0; k <= orders; ++k) {
        const BinBoundTable table = make_bin_bound_table(family, binning, k);
        for (std::size_t j = 0; j < table.theta.size(); ++j)
          tcsv << k << "," << (j + 1) << ","
               << num(binning.edges[j]) << "," << num(binning.edges[j + 1])
               << "," << num(table.theta[j]) << "\n";
      }
      write_output(tcsv.str(), theta_out);
    }

    const PCurveSpec spec(family, EffectDistribution::half_normal(sigma));
    std::ostringstream csv;
    csv << "# pcurve " << kVersion << " bounds curve family=" << family_name
        << " effects=half_normal(" << num(sigma) << ")\n";
    csv << "p,density,bound,hacked_density_M2,hacked_density_M5,"
           "hacked_density_M10\n";
    for (int i = 1; i <= points; ++i) {
      const double p = pmax * static_cast<double>(i) / points;
      csv << num(p) << "," << num(pcurve_density(spec, p)) << ","
          << num(bound_density(family, p)) << ","
          << num(hacked_pcurve(spec, 2, p)) << ","
          << num(hacked_pcurve(spec, 5, p)) << ","
          << num(hacked_pcurve(spec, 10, p)) << "\n";
    }
    write_output(csv.str(), out);
    return 0;
  } catch (const std::exception& e) {
    return emit_input_error("bounds", e.what(), nullptr, out);
  }
}

int cmd_critvals(int m, int reps, std::uint64_t seed, bool quantiles_only,
                 const std::string& out) {
  try {
    const LcmQuantileTable table = load_or_make_lcm_table(m, reps, seed);
    ordered_json j;
    j["version"] = kVersion;
    j["command"] = "critvals";
    j["table"] = to_json(table, !quantiles_only);
    write_output(j.dump(2) + "\n", out);
    return 0;
  } catch (const std::exception& e) {
    return emit_input_error("critvals", e.what(), nullptr, out);
  }
}

int cmd_summarize(const std::string& input, const CsvOptions& csv_opts,
                  const std::string& out) {
  IngestReport rep;
  try {
    const PValueSample sample = read_csv(input, csv_opts, &rep);
    ordered_json j;
    j["version"] = kVersion;
    j["command"] = "summarize";
    j["config"] = {{"input", input}};
    ordered_json ing;
    ing["total_rows"] = rep.total_rows;
    ing["parsed_rows"] = rep.parsed_rows;
    ing["rejected_rows"] = static_cast<long>(rep.errors.size());
    j["ingest"] = ing;
    j["summary"] = to_json(summarize(sample));
    write_output(j.dump(2) + "\n", out);
    return 0;
  } catch (const std::exception& e) {
    return emit_input_error("summarize", e.what(), &rep, out);
  }
}

void add_csv_options(CLI::App* cmd, CsvOptions& csv) {
  cmd->add_option("--p-col", csv.p_column, "p-value column name");
  cmd->add_option("--t-col", csv.t_column, "t-statistic column name");
  cmd->add_option("--cluster-col", csv.cluster_column, "cluster column name");
  cmd->add_option("--rounding-col", csv.rounding_column,
                  "rounding-digits column name");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-curve restriction tests, bounds, and simulations"};
  app.require_subcommand(1);

  TestArgs ta;
  CLI::App* test = app.add_subcommand("test", "run the test battery on a CSV");
  test->add_option("input", ta.input, "input CSV file")->required();
  test->add_option("--alpha", ta.alpha, "analysis interval (0, alpha]");
  CLI::Option* bins_opt =
      test->add_option("--bins", ta.bins, "histogram bins J (default 30, or "
                                          "15 under --cluster-subsample)");
  test->add_option("--orders", ta.orders, "monotonicity orders K for cs2b");
  test->add_option("--tests", ta.tests,
                   "subset of: binomial fisher cs1 cs2b lcm discontinuity")
      ->delimiter(',');
  test->add_option("--family", ta.family,
                   "one_sided_t or two_sided_t (for cs2b bounds)");
  test->add_flag("--deround", ta.deround_flag,
                 "jitter rounded p-values before testing");
  test->add_flag("--cluster-subsample", ta.subsample,
                 "keep one random p-value per cluster");
  test->add_flag("--cluster-robust", ta.cluster_robust,
                 "cluster-robust covariance for cs tests");
  test->add_flag("--ridge", ta.ridge,
                 "regularize the covariance when bins are empty");
  test->add_option("--fisher-alpha", ta.fisher_alpha,
                   "interval bound for the Fisher variant");
  test->add_option("--discontinuity-threshold", ta.disc_threshold,
                   "cutoff for the density discontinuity test");
  test->add_option("--seed", ta.seed, "seed for derounding/subsampling");
  test->add_option("--out", ta.out, "output path (default stdout)");
  add_csv_options(test, ta.csv);

  std::string sim_config, sim_out;
  CLI::App* sim = app.add_subcommand("simulate", "run a Monte Carlo study");
  sim->add_option("config", sim_config, "JSON config file")->required();
  sim->add_option("--out", sim_out, "output CSV path (default stdout)");

  std::string b_family = "one_sided_t", b_theta_out, b_out;
  double b_alpha = 0.15, b_sigma = 1.0, b_pmax = 0.25;
  int b_bins = 15, b_orders = 2, b_points = 250;
  CLI::App* bounds =
      app.add_subcommand("bounds", "emit bound tables and curve data");
  bounds->add_option("--family", b_family, "one_sided_t or two_sided_t");
  bounds->add_option("--alpha", b_alpha, "binning interval (0, alpha]");
  bounds->add_option("--bins", b_bins, "histogram bins J");
  bounds->add_option("--orders", b_orders, "max derivative order K");
  bounds->add_option("--sigma", b_sigma, "half-normal scale for the curve");
  bounds->add_option("--pmax", b_pmax, "upper end of the p grid");
  bounds->add_option("--points", b_points, "number of grid points");
  bounds->add_option("--theta-out", b_theta_out, "bin bound table CSV path");
  bounds->add_option("--out", b_out, "curve CSV path (default stdout)");

  int c_m = 1000, c_reps = 10000;
  std::uint64_t c_seed = 8675309;
  bool c_quantiles_only = false;
  std::string c_out;
  CLI::App* crit = app.add_subcommand(
      "critvals", "simulate the concavity-test reference distribution");
  crit->add_option("--m", c_m, "grid size");
  crit->add_option("--reps", c_reps, "number of bridge draws");
  crit->add_option("--seed", c_seed, "seed");
  crit->add_flag("--quantiles-only", c_quantiles_only,
                 "omit the raw draws from the output");
  crit->add_option("--out", c_out, "output path (default stdout)");

  std::string sum_input, sum_out;
  CsvOptions sum_csv;
  CLI::App* sum = app.add_subcommand("summarize", "describe a CSV sample");
  sum->add_option("input", sum_input, "input CSV file")->required();
  sum->add_option("--out", sum_out, "output path (default stdout)");
  add_csv_options(sum, sum_csv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (test->parsed()) {
      ta.bins_explicit = bins_opt->count() > 0;
      return cmd_test(ta);
    }
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out);
    if (bounds->parsed())
      return cmd_bounds(b_family, b_alpha, b_bins, b_orders, b_sigma, b_pmax,
                        b_points, b_theta_out, b_out);
    if (crit->parsed())
      return cmd_critvals(c_m, c_reps, c_seed, c_quantiles_only, c_out);
    if (sum->parsed()) return cmd_summarize(sum_input, sum_csv, sum_out);
  } catch (const std::exception& e) {
    std::cerr << "pcurve: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
