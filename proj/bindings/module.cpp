// Python bindings for the toolkit's main operations.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "revkin/estimation.hpp"
#include "revkin/identifiability.hpp"
#include "revkin/io.hpp"
#include "revkin/model.hpp"
#include "revkin/oracle.hpp"
#include "revkin/polyexp.hpp"
#include "revkin/version.hpp"

namespace py = pybind11;
using namespace revkin;

PYBIND11_MODULE(_core, m) {
    m.doc() = "reversible two-tissue compartment kinetics toolkit";
    m.attr("__version__") = kVersion;

    py::register_exception<DegenerateParams>(m, "DegenerateParamsError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<QuadratureFailure>(m, "QuadratureFailureError", PyExc_RuntimeError);
    py::register_exception<MissingWholeBlood>(m, "MissingWholeBloodError", PyExc_ValueError);
    py::register_exception<NonFiniteState>(m, "NonFiniteStateError", PyExc_RuntimeError);
    py::register_exception<IllConditioned>(m, "IllConditionedError", PyExc_RuntimeError);
    py::register_exception<InsufficientSamples>(m, "InsufficientSamplesError", PyExc_ValueError);
    py::register_exception<ExhaustedRedraws>(m, "ExhaustedRedrawsError", PyExc_RuntimeError);
    py::register_exception<NoSolution>(m, "NoSolutionError", PyExc_RuntimeError);
    py::register_exception<RankDeficient>(m, "RankDeficientError", PyExc_RuntimeError);

    py::class_<KineticParams>(m, "KineticParams")
        .def(py::init([](double K1, double k2, double k3, double k4) {
                 KineticParams p{K1, k2, k3, k4};
                 p.validate();
                 return p;
             }),
             py::arg("K1"), py::arg("k2"), py::arg("k3"), py::arg("k4"))
        .def_readwrite("K1", &KineticParams::K1)
        .def_readwrite("k2", &KineticParams::k2)
        .def_readwrite("k3", &KineticParams::k3)
        .def_readwrite("k4", &KineticParams::k4)
        .def("non_degenerate", &KineticParams::non_degenerate)
        .def("__repr__", [](const KineticParams& p) {
            return "KineticParams(K1=" + io::format_double(p.K1) +
                   ", k2=" + io::format_double(p.k2) + ", k3=" + io::format_double(p.k3) +
                   ", k4=" + io::format_double(p.k4) + ")";
        });

    py::class_<Alphas>(m, "Alphas")
        .def_readonly("alpha1", &Alphas::alpha1)
        .def_readonly("alpha2", &Alphas::alpha2)
        .def_readonly("k_half", &Alphas::k_half);

    py::class_<PolyexpTerm>(m, "PolyexpTerm")
        .def(py::init<double, double>(), py::arg("lam"), py::arg("mu"))
        .def_readwrite("lam", &PolyexpTerm::lambda)
        .def_readwrite("mu", &PolyexpTerm::mu);

    py::class_<PolyexpInput>(m, "PolyexpInput")
        .def(py::init<std::vector<PolyexpTerm>>(), py::arg("terms"))
        .def(py::init([](const std::vector<std::pair<double, double>>& pairs) {
                 std::vector<PolyexpTerm> terms;
                 for (const auto& [lam, mu] : pairs) terms.push_back({lam, mu});
                 return PolyexpInput(std::move(terms));
             }),
             py::arg("pairs"))
        .def_property_readonly("terms", &PolyexpInput::terms)
        .def_property_readonly("degree", &PolyexpInput::degree);

    py::class_<Region>(m, "Region")
        .def(py::init<std::string, KineticParams>(), py::arg("id"), py::arg("params"))
        .def_readwrite("id", &Region::id)
        .def_readwrite("params", &Region::params);

    py::class_<Configuration>(m, "Configuration")
        .def(py::init<std::vector<Region>, PolyexpInput>(), py::arg("regions"), py::arg("input"))
        .def_property_readonly("regions", &Configuration::regions)
        .def_property_readonly("input", &Configuration::input)
        .def_property_readonly("n_regions", &Configuration::n_regions)
        .def("to_json", &io::configuration_to_json)
        .def_static("from_json", &io::configuration_from_json, py::arg("text"));

    py::class_<MixingModel>(m, "MixingModel")
        .def(py::init<double>(), py::arg("vb"))
        .def_readonly("vb", &MixingModel::vb);

    py::class_<WbSample>(m, "WbSample")
        .def(py::init([](double time, double value) {
                 return WbSample{time, value};
             }),
             py::arg("time"), py::arg("value"))
        .def_readwrite("time", &WbSample::time)
        .def_readwrite("value", &WbSample::value);

    py::class_<TacCurve>(m, "TacCurve")
        .def_readwrite("region_id", &TacCurve::region_id)
        .def_readwrite("values", &TacCurve::values);

    py::class_<TacTable>(m, "TacTable")
        .def(py::init<>())
        .def_readwrite("time_grid", &TacTable::time_grid)
        .def_readwrite("curves", &TacTable::curves)
        .def_readwrite("wb_samples", &TacTable::wb_samples)
        .def("validate", &TacTable::validate)
        .def("to_csv", &io::tac_table_to_csv)
        .def_static("from_csv", &io::tac_table_from_csv, py::arg("text"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("cf", &Trajectory::cf)
        .def_readonly("cb", &Trajectory::cb)
        .def("to_csv", &io::trajectory_to_csv);

    py::class_<ExpPolyTerm>(m, "ExpPolyTerm")
        .def(py::init([](double exponent, std::vector<double> coeffs) {
                 return ExpPolyTerm{exponent, std::move(coeffs)};
             }),
             py::arg("exponent"), py::arg("coeffs"))
        .def_readwrite("exponent", &ExpPolyTerm::exponent)
        .def_readwrite("coeffs", &ExpPolyTerm::coeffs)
        .def_property_readonly("multiplicity", &ExpPolyTerm::multiplicity);

    py::class_<ExpPolySum>(m, "ExpPolySum")
        .def(py::init<>())
        .def(py::init([](std::vector<ExpPolyTerm> terms) {
                 return ExpPolySum{std::move(terms)};
             }),
             py::arg("terms"))
        .def_readwrite("terms", &ExpPolySum::terms)
        .def("to_json", &io::expsum_to_json);

    py::class_<AttenuationBiexp>(m, "AttenuationBiexp")
        .def(py::init<double, double, double>(), py::arg("a"), py::arg("b"), py::arg("c"))
        .def_readonly("a", &AttenuationBiexp::a)
        .def_readonly("b", &AttenuationBiexp::b)
        .def_readonly("c", &AttenuationBiexp::c);

    py::class_<Witness>(m, "Witness")
        .def_readonly("label", &Witness::label)
        .def_readonly("region_ids", &Witness::region_ids);

    py::class_<RichnessReport>(m, "RichnessReport")
        .def_readonly("satisfied", &RichnessReport::satisfied)
        .def_readonly("distinct_k34_count", &RichnessReport::distinct_k34_count)
        .def_readonly("distinct_alpha_count", &RichnessReport::distinct_alpha_count)
        .def_readonly("witnesses", &RichnessReport::witnesses)
        .def_readonly("violations", &RichnessReport::violations)
        .def("to_json", &io::richness_report_to_json);

    py::class_<EquivalenceReport>(m, "EquivalenceReport")
        .def_readonly("equivalent", &EquivalenceReport::equivalent)
        .def_readonly("zeta", &EquivalenceReport::zeta)
        .def_readonly("reindexing", &EquivalenceReport::reindexing)
        .def_readonly("max_param_deviation", &EquivalenceReport::max_param_deviation)
        .def_readonly("diagnostics", &EquivalenceReport::diagnostics)
        .def("to_json", &io::equivalence_report_to_json);

    py::class_<Range>(m, "Range")
        .def(py::init([](double lo, double hi) {
                 return Range{lo, hi};
             }),
             py::arg("lo"), py::arg("hi"))
        .def_readwrite("lo", &Range::lo)
        .def_readwrite("hi", &Range::hi);

    py::class_<SamplerRanges>(m, "SamplerRanges")
        .def(py::init<>())
        .def_readwrite("K1", &SamplerRanges::K1)
        .def_readwrite("k2", &SamplerRanges::k2)
        .def_readwrite("k3", &SamplerRanges::k3)
        .def_readwrite("k4", &SamplerRanges::k4)
        .def_readwrite("mu", &SamplerRanges::mu)
        .def_readwrite("lam", &SamplerRanges::lambda);

    py::enum_<GaugeRule>(m, "GaugeRule").value("lambda_first", GaugeRule::lambda_first);

    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("p", &FitOptions::p)
        .def_readwrite("n_starts", &FitOptions::n_starts)
        .def_readwrite("max_iters", &FitOptions::max_iters)
        .def_readwrite("residual_tol", &FitOptions::residual_tol)
        .def_readwrite("param_tol", &FitOptions::param_tol)
        .def_readwrite("seed", &FitOptions::seed)
        .def_readwrite("gauge", &FitOptions::gauge)
        .def_readwrite("start_ranges", &FitOptions::start_ranges);

    py::class_<StartTracePoint>(m, "StartTracePoint")
        .def_readonly("start", &StartTracePoint::start)
        .def_readonly("iter", &StartTracePoint::iter)
        .def_readonly("sse", &StartTracePoint::sse);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("config", &FitResult::config)
        .def_readonly("sse", &FitResult::sse)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("start_index", &FitResult::start_index)
        .def_readonly("iterations", &FitResult::iterations)
        .def_readonly("flags", &FitResult::flags)
        .def_readonly("trace", &FitResult::trace)
        .def_readonly("start_sse", &FitResult::start_sse)
        .def("to_json", &io::fit_result_to_json);

    py::class_<ScaleResolution>(m, "ScaleResolution")
        .def_readonly("zeta", &ScaleResolution::zeta)
        .def_readonly("f", &ScaleResolution::f);

    py::class_<UniquenessReport>(m, "UniquenessReport")
        .def_readonly("n_starts", &UniquenessReport::n_starts)
        .def_readonly("n_converged", &UniquenessReport::n_converged)
        .def_readonly("n_equivalent", &UniquenessReport::n_equivalent)
        .def_readonly("zeta_values", &UniquenessReport::zeta_values)
        .def_readonly("worst_deviation", &UniquenessReport::worst_deviation)
        .def_readonly("passed", &UniquenessReport::passed)
        .def_readonly("hypothesis_ok", &UniquenessReport::hypothesis_ok)
        .def_readonly("notes", &UniquenessReport::notes)
        .def("to_json", &io::uniqueness_report_to_json);

    m.def("compute_alphas", &compute_alphas, py::arg("params"));
    m.def("eval_cp", &eval_cp, py::arg("input"), py::arg("t"));
    m.def("eval_ct_closed_form", &eval_ct_closed_form, py::arg("params"), py::arg("input"),
          py::arg("t"));
    m.def("eval_ct_convolution", &eval_ct_convolution, py::arg("params"), py::arg("cp"),
          py::arg("t"), py::arg("quad_tol") = 1e-10);
    m.def("eval_cpet", &eval_cpet, py::arg("ct"), py::arg("cwb"), py::arg("mixing"));
    m.def("simulate_tacs", &simulate_tacs, py::arg("config"), py::arg("grid"),
          py::arg("mixing") = std::nullopt, py::arg("cwb") = std::nullopt);
    m.def("integrate_system", &integrate_system, py::arg("params"), py::arg("cp"),
          py::arg("t_end"), py::arg("step"));
    m.def("integrate_at", &integrate_at, py::arg("params"), py::arg("cp"), py::arg("grid"),
          py::arg("step"));
    m.def("eval_sum", &eval_sum, py::arg("sum"), py::arg("t"));
    m.def("canonicalize", &revkin::canonicalize, py::arg("sum"), py::arg("coeff_tol") = 1e-12);
    m.def("expand_configuration", &expand_configuration, py::arg("params"), py::arg("input"));
    m.def("sample_count_ok", &sample_count_ok, py::arg("multiplicities"), py::arg("n_samples"));
    m.def("fit_coefficients_given_exponents", &fit_coefficients_given_exponents,
          py::arg("samples"), py::arg("exponents"), py::arg("multiplicities"),
          py::arg("cond_limit") = 1e12);
    m.def("eval_attenuation", &eval_attenuation, py::arg("f"), py::arg("t"));
    m.def("check_assumption_A", &check_assumption_A, py::arg("config"), py::arg("tol") = 1e-9);
    m.def("check_region_richness", &check_region_richness, py::arg("config"),
          py::arg("tol") = 1e-9);
    m.def("equivalence_up_to_scale", &equivalence_up_to_scale, py::arg("a"), py::arg("b"),
          py::arg("tol") = 1e-6);
    m.def("sample_random_config", &sample_random_config, py::arg("seed"), py::arg("n"),
          py::arg("p"), py::arg("ranges") = SamplerRanges{});
    m.def("residual_sse", &residual_sse, py::arg("config"), py::arg("tacs"));
    m.def("fit_joint", &fit_joint, py::arg("tacs"), py::arg("options"),
          py::arg("warm_starts") = std::vector<Configuration>{},
          py::call_guard<py::gil_scoped_release>());
    m.def("resolve_scale", &resolve_scale, py::arg("fit"), py::arg("wb_samples"));
    m.def("verify_uniqueness", &verify_uniqueness, py::arg("truth"), py::arg("grid"),
          py::arg("options"), py::arg("equivalence_tol") = 1e-3,
          py::call_guard<py::gil_scoped_release>());
    m.def("add_gaussian_noise", &add_gaussian_noise, py::arg("tacs"), py::arg("noise_frac"),
          py::arg("seed"));
}
