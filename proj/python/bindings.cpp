#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "skewroute/eval.hpp"
#include "skewroute/io.hpp"
#include "skewroute/metrics.hpp"
#include "skewroute/router.hpp"

namespace py = pybind11;
using namespace skewroute;

namespace {

MetricSpec metric_spec(const std::string& name, double p) {
    const auto kind = parse_metric_kind(name);
    if (!kind) {
        throw Error(Errc::InvalidMetric, "unknown metric '" + name + "'");
    }
    return MetricSpec(*kind, p);
}

ScoreDistribution dist(const std::vector<double>& scores, bool shift_to_zero) {
    return validate_distribution(scores, shift_to_zero ? NegativePolicy::ShiftToZero : NegativePolicy::Reject);
}

py::dict report_dict(const CalibrationReport& r) {
    py::dict d;
    d["thresholds"] = r.thresholds;
    d["achieved_ratios"] = r.achieved_ratios;
    d["target_ratios"] = r.target_ratios;
    d["notes"] = r.notes;
    return d;
}

}  // namespace

PYBIND11_MODULE(_skewroute, m) {
    m.doc() = "Skewness-based query routing for retrieval-augmented generation";

    static py::exception<Error> error_type(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type, e.what());
        }
    });

    py::class_<ScoreDistribution>(m, "ScoreDistribution")
        .def_property_readonly("scores", [](const ScoreDistribution& d) {
            return std::vector<double>(d.scores().begin(), d.scores().end());
        })
        .def_property_readonly("degenerate", &ScoreDistribution::degenerate)
        .def_property_readonly("shifted", &ScoreDistribution::shifted)
        .def("__len__", &ScoreDistribution::size);

    m.def("validate_distribution", &dist, py::arg("scores"), py::arg("shift_to_zero") = false);

    m.def("entropy", [](const std::vector<double>& s) { return entropy(dist(s, false)); }, py::arg("scores"));
    m.def("gini", [](const std::vector<double>& s) { return gini(dist(s, false)); }, py::arg("scores"));
    m.def("cumulative_k", [](const std::vector<double>& s, double p) { return cumulative_k(dist(s, false), p); },
          py::arg("scores"), py::arg("P") = MetricSpec::kDefaultCumulativeProbability);
    m.def("minmax_area", [](const std::vector<double>& s) { return minmax_area(dist(s, false)); }, py::arg("scores"));
    m.def("powerlaw_slope", [](const std::vector<double>& s) { return powerlaw_slope(dist(s, false)); },
          py::arg("scores"));
    m.def(
        "difficulty_score",
        [](const std::vector<double>& s, const std::string& metric, double p) {
            return difficulty_score(dist(s, false), metric_spec(metric, p)).value;
        },
        py::arg("scores"), py::arg("metric") = "gini", py::arg("P") = MetricSpec::kDefaultCumulativeProbability);

    py::class_<RouterConfig>(m, "Router")
        .def(py::init([](const std::string& metric, std::vector<double> thresholds,
                         const std::vector<std::pair<std::string, double>>& arms, double p) {
                 return RouterConfig(metric_spec(metric, p), std::move(thresholds), make_arms(arms));
             }),
             py::arg("metric"), py::arg("thresholds"), py::arg("arms"),
             py::arg("P") = MetricSpec::kDefaultCumulativeProbability)
        .def(
            "decide",
            [](const RouterConfig& cfg, const std::vector<double>& scores, bool shift_to_zero) {
                const Decision d = decide(dist(scores, shift_to_zero), cfg);
                return py::make_tuple(d.arm_name, d.arm_rank, d.difficulty.value);
            },
            py::arg("scores"), py::arg("shift_to_zero") = false)
        .def_property_readonly("thresholds", [](const RouterConfig& c) {
            return std::vector<double>(c.thresholds().begin(), c.thresholds().end());
        })
        .def("to_json", [](const RouterConfig& c) { return calibration_json(c, nullptr); })
        .def_static("from_json", &parse_router_config);

    m.def(
        "calibrate",
        [](const std::vector<double>& difficulties, const std::vector<double>& ratios) {
            return report_dict(calibrate(difficulties, ratios));
        },
        py::arg("difficulties"), py::arg("target_ratios"));

    m.def("random_baseline", &random_baseline, py::arg("hit_small"), py::arg("hit_large"), py::arg("rho"));
    m.def(
        "average_effectiveness",
        [](const std::vector<std::pair<double, double>>& points, double hit_small, double hit_large) {
            BudgetCurve curve;
            for (const auto& [rho, hit] : points) {
                curve.points.push_back(BudgetPoint{rho, hit, 0.0, rho});
            }
            return average_effectiveness(curve, hit_small, hit_large);
        },
        py::arg("points"), py::arg("hit_small"), py::arg("hit_large"));

    py::class_<QueryRecord>(m, "QueryRecord")
        .def_readonly("id", &QueryRecord::id)
        .def_property_readonly("scores", [](const QueryRecord& r) {
            return std::vector<double>(r.distribution.scores().begin(), r.distribution.scores().end());
        })
        .def_readonly("correct", &QueryRecord::correct)
        .def_readonly("answer_rank", &QueryRecord::answer_rank)
        .def_readonly("meta", &QueryRecord::meta);

    m.def(
        "load_records",
        [](const std::filesystem::path& path, bool shift_to_zero) {
            return load_records(path, shift_to_zero ? NegativePolicy::ShiftToZero : NegativePolicy::Reject);
        },
        py::arg("path"), py::arg("shift_to_zero") = false);
    m.def("write_records", py::overload_cast<const std::vector<QueryRecord>&, const std::filesystem::path&>(
                               &write_records),
          py::arg("records"), py::arg("path"));

    m.def(
        "generate_synthetic",
        [](std::size_t n, double easy_fraction, std::size_t k, double alpha, double noise, double pse, double psh,
           double ple, double plh, std::uint64_t seed) {
            return generate_synthetic(SyntheticSpec{n, easy_fraction, k, alpha, noise, pse, psh, ple, plh, seed});
        },
        py::arg("n_queries") = 10000, py::arg("easy_fraction") = 0.5, py::arg("K") = 100, py::arg("alpha_easy") = 1.0,
        py::arg("noise") = 0.1, py::arg("p_small_easy") = 0.9, py::arg("p_small_hard") = 0.2,
        py::arg("p_large_easy") = 0.92, py::arg("p_large_hard") = 0.7, py::arg("seed") = 42);

    m.def(
        "budget_sweep",
        [](const std::vector<QueryRecord>& records, const std::string& metric, double p,
           const std::vector<double>& fractions, const std::vector<std::pair<std::string, double>>& arms,
           double tokens) {
            SweepOptions options;
            options.tokens_per_query = tokens;
            const auto arm_list = make_arms(arms);
            const BudgetCurve curve = budget_sweep(records, metric_spec(metric, p), fractions, arm_list, options);
            py::list out;
            for (const BudgetPoint& pt : curve.points) {
                py::dict d;
                d["large_fraction"] = pt.large_fraction;
                d["hit_at_1"] = pt.hit_at_1;
                d["avg_cost"] = pt.avg_cost;
                d["routed_large_fraction"] = pt.routed_large_fraction;
                out.append(d);
            }
            return out;
        },
        py::arg("records"), py::arg("metric") = "gini", py::arg("P") = MetricSpec::kDefaultCumulativeProbability,
        py::arg("fractions") = std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8, 1.0},
        py::arg("arms") = std::vector<std::pair<std::string, double>>{{kSmallArm, 0.0485}, {kLargeArm, 0.5724}},
        py::arg("tokens_per_query") = kDefaultTokensPerQuery);
}
