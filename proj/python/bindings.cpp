#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccpd/calibration.hpp"
#include "ccpd/contrast.hpp"
#include "ccpd/detector.hpp"
#include "ccpd/discriminator.hpp"
#include "ccpd/errors.hpp"
#include "ccpd/simbench.hpp"

namespace py = pybind11;
using namespace ccpd;

namespace {

ObservationBuffer to_buffer(const std::vector<double>& values) { return ObservationBuffer::from_scalars(values); }

py::dict row_to_dict(const BenchmarkRow& row) {
    py::dict d;
    d["scenario"] = row.scenario;
    d["family"] = row.family;
    d["threshold"] = row.threshold;
    d["mean_delay"] = row.mean_delay;
    d["std_delay"] = row.std_delay;
    d["misses"] = row.misses;
    d["false_alarms"] = row.false_alarms;
    d["rep_delays"] = row.rep_delays;
    d["stopping_times"] = row.stopping_times;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Online change-point detection with contrastive discriminators";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<EmptyRange>(m, "EmptyRange", base.ptr());
    py::register_exception<UnsupportedFamily>(m, "UnsupportedFamily", base.ptr());
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
    py::register_exception<NonFiniteObjective>(m, "NonFiniteObjective", base.ptr());
    py::register_exception<AlreadyAlarmed>(m, "AlreadyAlarmed", base.ptr());
    py::register_exception<DegenerateReference>(m, "DegenerateReference", base.ptr());
    py::register_exception<QuadratureFailure>(m, "QuadratureFailure", base.ptr());

    // contrast
    m.def("softplus_half", &softplus_half, py::arg("x"));
    m.def(
        "contrastive_value",
        [](const std::vector<double>& pre, const std::vector<double>& post) {
            return contrastive_value(SplitView(pre, post));
        },
        py::arg("pre"), py::arg("post"), "Contrastive functional of outputs split into pre/post segments.");
    m.def(
        "contrastive_gradient",
        [](const std::vector<double>& pre, const std::vector<double>& post) {
            return contrastive_gradient(SplitView(pre, post));
        },
        py::arg("pre"), py::arg("post"));
    m.def(
        "max_statistic",
        [](const std::vector<std::pair<std::size_t, double>>& values, std::size_t t, std::size_t margin) {
            std::vector<SplitScore> scores;
            for (const auto& [tau, v] : values) scores.push_back({tau, v});
            const auto s = max_statistic(scores, t, margin);
            return std::make_pair(s.value, s.tau);
        },
        py::arg("values"), py::arg("t"), py::arg("margin") = 10,
        "Returns (value, tau) of the best admissible split.");

    // discriminators
    py::class_<DiscriminatorSpec>(m, "DiscriminatorSpec")
        .def(py::init([](const std::string& family, int epochs, double lr, double clamp) {
                 auto s = parse_family(family);
                 s.optimizer.epochs = epochs;
                 s.optimizer.learning_rate = lr;
                 s.clamp_bound = clamp;
                 s.validate();
                 return s;
             }),
             py::arg("family") = "poly:1", py::arg("epochs") = 50, py::arg("learning_rate") = 0.1,
             py::arg("clamp_bound") = 10.0)
        .def_property_readonly("label", &DiscriminatorSpec::label)
        .def_property_readonly("num_params", &DiscriminatorSpec::num_params)
        .def_property_readonly("epochs", [](const DiscriminatorSpec& s) { return s.optimizer.epochs; })
        .def_property_readonly("learning_rate",
                               [](const DiscriminatorSpec& s) { return s.optimizer.learning_rate; })
        .def_readonly("clamp_bound", &DiscriminatorSpec::clamp_bound)
        .def("__repr__", [](const DiscriminatorSpec& s) { return "DiscriminatorSpec('" + s.label() + "')"; });

    py::class_<FittedDiscriminator>(m, "FittedDiscriminator")
        .def_readonly("params", &FittedDiscriminator::params)
        .def_readonly("achieved_value", &FittedDiscriminator::achieved_value)
        .def_readonly("spec", &FittedDiscriminator::spec)
        .def("__call__", [](const FittedDiscriminator& f, double x) { return evaluate(f, x); });

    m.def(
        "features", [](const DiscriminatorSpec& s, double x) { return features(s, x); }, py::arg("spec"),
        py::arg("x"));
    m.def(
        "fit",
        [](const DiscriminatorSpec& s, const std::vector<double>& pre, const std::vector<double>& post,
           std::uint64_t seed) { return fit(s, SampleView(pre, 1), SampleView(post, 1), seed); },
        py::arg("spec"), py::arg("pre"), py::arg("post"), py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());

    // detector
    py::class_<DetectorConfig>(m, "DetectorConfig")
        .def(py::init([](double threshold, const DiscriminatorSpec& spec, std::size_t warmup, std::size_t margin,
                         std::optional<std::size_t> window_cap, std::uint64_t seed, bool warm_start,
                         unsigned threads) {
                 DetectorConfig c;
                 c.threshold = threshold;
                 c.spec = spec;
                 c.warmup = warmup;
                 c.margin = margin;
                 c.window_cap = window_cap;
                 c.seed = seed;
                 c.warm_start = warm_start;
                 c.threads = threads;
                 c.validate();
                 return c;
             }),
             py::arg("threshold"), py::arg("spec") = DiscriminatorSpec{}, py::arg("warmup") = 20,
             py::arg("margin") = 10, py::arg("window_cap") = std::nullopt, py::arg("seed") = 0,
             py::arg("warm_start") = false, py::arg("threads") = 1)
        .def_readwrite("threshold", &DetectorConfig::threshold)
        .def_readwrite("warmup", &DetectorConfig::warmup)
        .def_readwrite("margin", &DetectorConfig::margin)
        .def_readwrite("window_cap", &DetectorConfig::window_cap)
        .def_readwrite("seed", &DetectorConfig::seed)
        .def_readwrite("threads", &DetectorConfig::threads);

    py::class_<DetectionResult>(m, "DetectionResult")
        .def_readonly("stopping_time", &DetectionResult::stopping_time)
        .def_readonly("tau_hat", &DetectionResult::tau_hat)
        .def_readonly("statistic", &DetectionResult::statistic)
        .def_property_readonly("trace", [](const DetectionResult& r) {
            std::vector<std::tuple<std::size_t, double, std::size_t>> out;
            for (const auto& p : r.trace) out.emplace_back(p.t, p.statistic, p.tau_hat);
            return out;
        });

    py::class_<Detector>(m, "Detector")
        .def(py::init<DetectorConfig>(), py::arg("config"))
        .def(
            "step",
            [](Detector& d, double x) -> std::optional<std::tuple<std::size_t, std::size_t, double>> {
                const auto a = d.step(x);
                if (!a) return std::nullopt;
                return std::make_tuple(a->t, a->tau_hat, a->statistic);
            },
            py::arg("x"), "Consumes one sample; returns (t, tau_hat, statistic) on alarm.")
        .def_property_readonly("t", &Detector::t)
        .def_property_readonly("alarmed", &Detector::alarmed)
        .def("result", &Detector::result);

    m.def(
        "run", [](const std::vector<double>& stream, const DetectorConfig& c) { return run(to_buffer(stream), c); },
        py::arg("stream"), py::arg("config"), py::call_guard<py::gil_scoped_release>());

    // calibration
    m.def(
        "calibrate",
        [](double mean, double std, const DiscriminatorSpec& spec, std::size_t n, std::size_t reps,
           std::size_t rank, std::size_t warmup, std::size_t margin, std::uint64_t seed, unsigned threads) {
            CalibrationConfig c;
            c.reference_mean = mean;
            c.reference_std = std;
            c.spec = spec;
            c.n = n;
            c.reps = reps;
            c.rank = rank;
            c.warmup = warmup;
            c.margin = margin;
            c.seed = seed;
            c.threads = threads;
            return calibrate(c);
        },
        py::arg("mean"), py::arg("std"), py::arg("spec") = DiscriminatorSpec{}, py::arg("n") = 150,
        py::arg("reps") = 10, py::arg("rank") = 2, py::arg("warmup") = 20, py::arg("margin") = 10,
        py::arg("seed") = 0, py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("upper_order_statistic", [](const std::vector<double>& v, std::size_t rank) {
        return upper_order_statistic(v, rank);
    });

    // simbench
    py::class_<Gaussian>(m, "Gaussian")
        .def(py::init<double, double>(), py::arg("mean") = 0.0, py::arg("std") = 1.0)
        .def_readwrite("mean", &Gaussian::mean)
        .def_readwrite("std", &Gaussian::std);
    py::class_<Uniform>(m, "Uniform")
        .def(py::init<double, double>(), py::arg("lo") = 0.0, py::arg("hi") = 1.0)
        .def_readwrite("lo", &Uniform::lo)
        .def_readwrite("hi", &Uniform::hi);

    m.def("js_divergence", [](const Distribution& p, const Distribution& q) { return js_divergence(p, q); },
          py::arg("p"), py::arg("q"));
    m.def("js_lower_bound_check",
          [](const std::vector<double>& mu, const std::vector<double>& sigma) {
              return js_lower_bound_check(mu, sigma);
          },
          py::arg("mu"), py::arg("sigma"));

    m.def(
        "generate_example",
        [](int example, std::uint64_t seed, std::size_t rep) { return generate(example_scenario(example, seed), rep); },
        py::arg("example"), py::arg("seed"), py::arg("rep") = 0);

    m.def(
        "verify_lemma1",
        [](const Gaussian& p, const Gaussian& q, std::size_t tau, std::size_t t, std::size_t reps,
           std::uint64_t seed) {
            const auto r = verify_lemma1(p, q, tau, t, reps, seed);
            py::dict d;
            d["mc_mean"] = r.mc_mean;
            d["std_error"] = r.std_error;
            d["js"] = r.js;
            d["target"] = r.target;
            d["z"] = r.z;
            return d;
        },
        py::arg("p"), py::arg("q"), py::arg("tau"), py::arg("t"), py::arg("mc_reps") = 10000, py::arg("seed") = 0);

    m.def(
        "simulate",
        [](int example, const DiscriminatorSpec& spec, std::uint64_t seed, std::size_t reps) {
            BenchmarkOptions o;
            o.seed = seed;
            o.reps = reps;
            BenchmarkRow row;
            {
                py::gil_scoped_release release;
                row = run_benchmark_cell({example_scenario(example, seed), spec}, o);
            }
            return row_to_dict(row);
        },
        py::arg("example"), py::arg("spec"), py::arg("seed") = 0, py::arg("reps") = 10);

    m.attr("__version__") = "0.1.0";
}
