#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcurve/bounds.hpp"
#include "pcurve/estimators.hpp"
#include "pcurve/hypothesis_tests.hpp"
#include "pcurve/null_model.hpp"
#include "pcurve/simulate.hpp"
#include "pcurve/version.hpp"

namespace py = pybind11;
using namespace pcurve;

namespace {

PValueSample make_sample(const std::vector<double>& values,
                         const std::optional<std::vector<std::string>>& cluster) {
  PValueSample s;
  s.values = values;
  if (cluster) s.cluster_id = *cluster;
  s.validate();
  return s;
}

} // namespace

PYBIND11_MODULE(_pcurve, m) {
  m.doc() = "p-curve restriction tests and bounds";
  m.attr("__version__") = kVersion;

  py::enum_<TestFamily>(m, "TestFamily")
      .value("one_sided_t", TestFamily::one_sided_t)
      .value("two_sided_t", TestFamily::two_sided_t);

  py::class_<EffectDistribution>(m, "EffectDistribution")
      .def_static("point_mass", &EffectDistribution::point_mass, py::arg("h"))
      .def_static("normal", &EffectDistribution::normal, py::arg("mu"),
                  py::arg("sigma"))
      .def_static("half_normal", &EffectDistribution::half_normal,
                  py::arg("sigma"))
      .def_static("discrete", &EffectDistribution::discrete, py::arg("atoms"),
                  py::arg("weights"))
      .def_static("mixture", &EffectDistribution::mixture, py::arg("weights"),
                  py::arg("components"))
      .def("nonnegative_support", &EffectDistribution::nonnegative_support);

  py::class_<PCurveSpec>(m, "PCurveSpec")
      .def(py::init<TestFamily, EffectDistribution, std::optional<double>,
                    bool>(),
           py::arg("family"), py::arg("effects"),
           py::arg("alpha") = std::nullopt,
           py::arg("allow_signed_effects") = false);

  py::class_<TestResult>(m, "TestResult")
      .def_readonly("test", &TestResult::test)
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("p_value", &TestResult::p_value)
      .def_readonly("reference", &TestResult::reference)
      .def_readonly("not_applicable", &TestResult::not_applicable)
      .def_readonly("diagnostics", &TestResult::diagnostics)
      .def_readonly("notes", &TestResult::notes)
      .def("__repr__", [](const TestResult& r) -> std::string {
        if (r.not_applicable) return "<TestResult " + r.test + " not applicable>";
        return "<TestResult " + r.test +
               " statistic=" + std::to_string(r.statistic) +
               " p_value=" + std::to_string(r.p_value) + ">";
      });

  m.def("critical_value", &critical_value, py::arg("family"), py::arg("p"));
  m.def("power", &power, py::arg("family"), py::arg("p"), py::arg("h"));
  m.def("t_to_p", &t_to_p, py::arg("t"));
  m.def("density", &pcurve_density, py::arg("spec"), py::arg("p"));
  m.def("cdf", &pcurve_cdf, py::arg("spec"), py::arg("p"));
  m.def("derivative", &pcurve_derivative, py::arg("spec"), py::arg("p"),
        py::arg("k"));
  m.def("bound_density", &bound_density, py::arg("family"), py::arg("p"));
  m.def("bound_derivative", &bound_derivative, py::arg("family"), py::arg("p"),
        py::arg("k"));
  m.def("hacked_density", &hacked_pcurve, py::arg("spec"), py::arg("m"),
        py::arg("p"));
  m.def(
      "sharp_bin_bound",
      [](TestFamily family, int J, double alpha, int j, int k) {
        return sharp_bin_bound(family, BinningScheme(J, alpha), j, k);
      },
      py::arg("family"), py::arg("J"), py::arg("alpha"), py::arg("j"),
      py::arg("k"));

  m.def(
      "draw_pvalues",
      [](const PCurveSpec& spec, long n, std::uint64_t seed, int rounds,
         bool shared_effect) {
        const HackingModel h = rounds <= 1
                                   ? HackingModel::none()
                                   : HackingModel::spec_search(rounds,
                                                               shared_effect);
        return draw_pvalues(spec, h, n, seed).values;
      },
      py::arg("spec"), py::arg("n"), py::arg("seed"),
      py::arg("spec_search_rounds") = 1, py::arg("shared_effect") = false);

  m.def(
      "run_battery",
      [](const std::vector<double>& values, double alpha, int J, int K,
         TestFamily family, const std::vector<std::string>& tests,
         const std::optional<std::vector<std::string>>& cluster_id,
         bool cluster_robust, bool ridge) {
        BatteryOptions opts;
        opts.alpha = alpha;
        opts.J = J;
        opts.K = K;
        opts.family = family;
        opts.tests = tests;
        opts.cluster_robust = cluster_robust;
        opts.ridge = ridge;
        return run_battery(make_sample(values, cluster_id), opts);
      },
      py::arg("values"), py::arg("alpha") = 0.15, py::arg("J") = 30,
      py::arg("K") = 2, py::arg("family") = TestFamily::two_sided_t,
      py::arg("tests") = std::vector<std::string>{},
      py::arg("cluster_id") = std::nullopt, py::arg("cluster_robust") = false,
      py::arg("ridge") = false);
}
