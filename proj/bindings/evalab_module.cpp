#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evalab/constructions.hpp"
#include "evalab/experiments.hpp"
#include "evalab/io.hpp"
#include "evalab/version.hpp"

namespace py = pybind11;
using namespace evalab;

namespace {

Dataset dataset_from_labels(const std::vector<std::string>& domain, const std::vector<std::string>& points) {
    return Dataset::from_labels(make_domain(domain), points);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Evaluability laboratory: divergences, test families, scores, adversarial "
              "constructions and Monte-Carlo evaluability experiments on finite discrete domains";
    m.attr("__version__") = version_string;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

    py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
        .def(py::init([](const std::vector<std::string>& labels, const std::vector<double>& probs) {
                 return DiscreteDistribution::make(labels, probs);
             }),
             py::arg("labels"), py::arg("probs"))
        .def_property_readonly("labels", &DiscreteDistribution::labels)
        .def_property_readonly("probs", &DiscreteDistribution::probs)
        .def("support_size", &DiscreteDistribution::support_size)
        .def("__len__", &DiscreteDistribution::size)
        .def("__eq__", [](const DiscreteDistribution& a, const DiscreteDistribution& b) { return a == b; })
        .def("__repr__", [](const DiscreteDistribution& d) {
            return "DiscreteDistribution(" + std::to_string(d.size()) + " points)";
        });

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&dataset_from_labels), py::arg("domain"), py::arg("points"))
        .def_property_readonly("points", &Dataset::point_labels)
        .def("counts", &Dataset::counts)
        .def("__len__", &Dataset::size)
        .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

    m.def("sample", &sample, py::arg("q"), py::arg("m"), py::arg("seed"),
          "m i.i.d. draws by inverse CDF; identical (q, m, seed) gives an identical dataset");
    m.def(
        "empirical_distribution",
        [](const Dataset& s, const std::vector<std::string>& domain) {
            return empirical_distribution(s, domain);
        },
        py::arg("dataset"), py::arg("domain"));

    m.def("tv", &tv, py::arg("p"), py::arg("q"));
    m.def("kl", &kl, py::arg("p"), py::arg("q"), "KL(p || q), natural log, 0 ln 0 = 0");
    m.def("renyi", &renyi, py::arg("p"), py::arg("q"), py::arg("alpha"),
          "Renyi divergence of order alpha > 1 with p in the ground-truth slot");
    m.def("hellinger_sq", &hellinger_sq, py::arg("p"), py::arg("q"));
    m.def("coverage_profile", &coverage_profile, py::arg("q"), py::arg("qstar"), py::arg("n"));
    m.def("restricted_kl", &restricted_kl, py::arg("p"), py::arg("q"), py::arg("beta"),
          "min over subsets E of support(p) with p(E) >= 1 - beta of the conditional KL on E");
    m.def("check_lower_bound", &check_lower_bound, py::arg("qstar"), py::arg("gamma"));
    m.def("check_margin", &check_margin, py::arg("qstar"), py::arg("q"), py::arg("n"), py::arg("alpha"));
    m.def("check_delta_close", &check_delta_close, py::arg("qstar"), py::arg("q"), py::arg("delta"));

    py::class_<FunctionFamily>(m, "FunctionFamily")
        .def(py::init([](const std::vector<std::string>& labels, std::vector<std::vector<double>> rows) {
                 return FunctionFamily::make(labels, std::move(rows));
             }),
             py::arg("labels"), py::arg("rows"))
        .def_static("all_binary",
                    [](const std::vector<std::string>& labels) { return FunctionFamily::all_binary(labels); },
                    py::arg("labels"))
        .def_static("thresholds", &FunctionFamily::thresholds, py::arg("labels"))
        .def_static("singletons", &FunctionFamily::singletons, py::arg("labels"))
        .def_static("no_taxonomy", &FunctionFamily::no_taxonomy, py::arg("k"), py::arg("n_k"))
        .def_property_readonly("labels",
                               [](const FunctionFamily& f) { return f.domain()->labels; })
        .def_property_readonly("rows", &FunctionFamily::row_vectors)
        .def_property_readonly("is_binary", &FunctionFamily::is_binary)
        .def("__len__", &FunctionFamily::members);

    m.def(
        "ipm_exact",
        [](const DiscreteDistribution& p, const DiscreteDistribution& q, const FunctionFamily& f) {
            const auto r = ipm_exact(p, q, f);
            return py::make_tuple(r.value, r.witness_index);
        },
        py::arg("p"), py::arg("q"), py::arg("family"), "returns (value, witness_row)");
    m.def("vc_dimension", &vc_dimension, py::arg("family"));
    m.def("fat_shattering_dim", &fat_shattering_dim, py::arg("family"), py::arg("gamma"));

    py::class_<TestFunction>(m, "TestFunction")
        .def(py::init([](const std::vector<std::string>& labels, const std::vector<double>& values) {
                 return TestFunction::make(labels, values);
             }),
             py::arg("labels"), py::arg("values"))
        .def_property_readonly("labels", [](const TestFunction& g) { return g.domain()->labels; })
        .def_property_readonly("values", &TestFunction::values);

    m.def("nll_score", &nll_score, py::arg("q"), py::arg("dataset"));
    m.def("perplexity", &perplexity, py::arg("q"), py::arg("dataset"));
    m.def("empirical_ipm_score", &empirical_ipm_score, py::arg("q"), py::arg("dataset"), py::arg("family"));
    m.def(
        "scheffe_select",
        [](const DiscreteDistribution& q1, const DiscreteDistribution& q2, const Dataset& s,
           const FunctionFamily& f) {
            const auto sel = scheffe_select(q1, q2, s, f);
            return py::make_tuple(sel.winner, sel.witness_index);
        },
        py::arg("q1"), py::arg("q2"), py::arg("dataset"), py::arg("family"),
        "returns (winner 0/1, witness_row); ties pick q1");
    m.def("scheffe_score", &scheffe_score, py::arg("q"), py::arg("q1"), py::arg("q2"), py::arg("dataset"),
          py::arg("family"));
    m.def("coverage_score", &coverage_score, py::arg("q"), py::arg("dataset"), py::arg("n"));
    m.def("fixed_test_score", &fixed_test_score, py::arg("q"), py::arg("dataset"), py::arg("g"));
    m.def("fixed_test_metric", &fixed_test_metric, py::arg("p"), py::arg("q"), py::arg("g"));

    py::class_<ScoreSpec>(m, "ScoreSpec")
        .def_static("nll", &ScoreSpec::nll)
        .def_static("empirical_ipm", &ScoreSpec::empirical_ipm, py::arg("family"))
        .def_static("scheffe_ipm", &ScoreSpec::scheffe_ipm, py::arg("family"))
        .def_static("coverage", &ScoreSpec::coverage, py::arg("n"))
        .def_static("fixed_test", &ScoreSpec::fixed_test, py::arg("g"));

    py::class_<MetricSpec>(m, "MetricSpec")
        .def_static("tv", &MetricSpec::tv)
        .def_static("kl", &MetricSpec::kl)
        .def_static("renyi", &MetricSpec::renyi, py::arg("alpha"))
        .def_static("hellinger2", &MetricSpec::hellinger2)
        .def_static("coverage", &MetricSpec::coverage, py::arg("n"))
        .def_static("restricted_kl", &MetricSpec::restricted_kl, py::arg("beta"))
        .def_static("ipm", &MetricSpec::ipm, py::arg("family"))
        .def_static("fixed_test", &MetricSpec::fixed_test, py::arg("g"));

    m.def("metric_value", &metric_value, py::arg("metric"), py::arg("q"), py::arg("qstar"));

    py::class_<GroundTruthSelector>(m, "GroundTruthSelector")
        .def_static("fixed", &GroundTruthSelector::fixed, py::arg("qstar"))
        .def_static("uniform_over", &GroundTruthSelector::uniform_over, py::arg("options"));

    py::class_<AnalyticFact>(m, "AnalyticFact")
        .def_readonly("id", &AnalyticFact::id)
        .def_readonly("description", &AnalyticFact::description)
        .def_readonly("value", &AnalyticFact::value)
        .def_property_readonly("kind", [](const AnalyticFact& f) {
            return f.kind == AnalyticFact::Bound::Exact   ? "exact"
                   : f.kind == AnalyticFact::Bound::Lower ? "lower"
                                                          : "upper";
        });

    py::class_<ConstructionBundle>(m, "ConstructionBundle")
        .def_readonly("recipe", &ConstructionBundle::recipe)
        .def_readonly("qstar", &ConstructionBundle::qstar)
        .def_readonly("q1", &ConstructionBundle::q1)
        .def_readonly("q2", &ConstructionBundle::q2)
        .def_readonly("q3", &ConstructionBundle::q3)
        .def_readonly("g", &ConstructionBundle::g)
        .def_readonly("facts", &ConstructionBundle::facts)
        .def_property_readonly("parameters",
                               [](const ConstructionBundle& b) {
                                   py::dict d;
                                   for (const auto& [key, value] : b.parameters) {
                                       d[py::str(key)] = value;
                                   }
                                   return d;
                               })
        .def("to_json", [](const ConstructionBundle& b) { return io::bundle_to_json(b).dump(2); });

    m.def("verify_bundle", &verify_bundle, py::arg("bundle"));
    m.def("renyi_pair", &renyi_pair, py::arg("alpha"), py::arg("m"));
    m.def("kl_pair", &kl_pair, py::arg("m"));
    m.def("coverage_triple", &coverage_triple, py::arg("n"), py::arg("gamma"), py::arg("eta"));
    m.def("fixed_test_pair", &fixed_test_pair, py::arg("b"), py::arg("g2"));
    m.def("tv_nll_triple", &tv_nll_triple, py::arg("c"), py::arg("eps"),
          py::arg("m") = std::optional<double>{});
    m.def("restricted_kl_triple", &restricted_kl_triple, py::arg("beta"), py::arg("m"));
    m.def("delta_close_pair", &delta_close_pair, py::arg("qstar"), py::arg("delta"), py::arg("seed"));

    py::class_<TrialConfig>(m, "TrialConfig")
        .def(py::init([](DiscreteDistribution q1, DiscreteDistribution q2, GroundTruthSelector selector,
                         MetricSpec metric, ScoreSpec score, std::uint64_t m, std::uint64_t trials, double c,
                         double eps, std::uint64_t master_seed) {
                 TrialConfig cfg{std::move(q1), std::move(q2), std::move(selector), std::move(metric),
                                 std::move(score), m,          trials,              c,
                                 eps,            master_seed};
                 cfg.validate();
                 return cfg;
             }),
             py::arg("q1"), py::arg("q2"), py::arg("selector"), py::arg("metric"), py::arg("score"),
             py::arg("m"), py::arg("trials"), py::arg("c") = 1.0, py::arg("eps") = 0.1,
             py::arg("master_seed") = 0)
        .def_readonly("m", &TrialConfig::m)
        .def_readonly("trials", &TrialConfig::trials)
        .def_readonly("master_seed", &TrialConfig::master_seed)
        .def("to_json", [](const TrialConfig& c) { return io::trial_config_to_json(c).dump(2); });

    py::class_<RateEstimate>(m, "RateEstimate")
        .def_readonly("count", &RateEstimate::count)
        .def_readonly("total", &RateEstimate::total)
        .def_readonly("rate", &RateEstimate::rate)
        .def_readonly("lo", &RateEstimate::lo)
        .def_readonly("hi", &RateEstimate::hi)
        .def("__repr__", [](const RateEstimate& r) {
            return "RateEstimate(" + std::to_string(r.count) + "/" + std::to_string(r.total) + ")";
        });

    py::class_<TrialReport>(m, "TrialReport")
        .def_readonly("implication_failure", &TrialReport::implication_failure)
        .def_readonly("misrank", &TrialReport::misrank)
        .def_readonly("tie", &TrialReport::tie)
        .def_readonly("prefer_q1", &TrialReport::prefer_q1)
        .def_readonly("metric_by_ground_truth", &TrialReport::metric_by_ground_truth)
        .def("to_json", [](const TrialReport& r) { return io::trial_report_to_json(r).dump(2); })
        .def("to_csv", [](const TrialReport& r) { return io::trial_rows_to_csv(r); });

    m.def("run_trials", &run_trials, py::arg("config"), py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("estimate_misranking", &estimate_misranking, py::arg("q1"), py::arg("q2"), py::arg("selector"),
          py::arg("metric"), py::arg("score"), py::arg("m"), py::arg("trials"), py::arg("seed"),
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("check_estimability", &check_estimability, py::arg("metric"), py::arg("score"), py::arg("qstar"),
          py::arg("q"), py::arg("m"), py::arg("trials"), py::arg("eps"), py::arg("seed"),
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

    py::class_<ScoreDistanceReport>(m, "ScoreDistanceReport")
        .def_readonly("estimate", &ScoreDistanceReport::estimate)
        .def_readonly("tv_pair", &ScoreDistanceReport::tv_pair)
        .def_readonly("slack", &ScoreDistanceReport::slack)
        .def_readonly("bound", &ScoreDistanceReport::bound)
        .def_readonly("within_bound", &ScoreDistanceReport::within_bound);

    m.def("score_distribution_distance", &score_distribution_distance, py::arg("score"), py::arg("q"),
          py::arg("p1"), py::arg("p2"), py::arg("m"), py::arg("trials"), py::arg("seed"),
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
}
