#include "ccpd/simbench.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <Eigen/Dense>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ccpd/calibration.hpp"
#include "ccpd/contrast.hpp"
#include "ccpd/detector.hpp"
#include "ccpd/errors.hpp"
#include "ccpd/parallel.hpp"
#include "ccpd/rng.hpp"

namespace ccpd {

namespace {

constexpr double kSigma = 0.1;
constexpr double kJsTolerance = 1e-8;
constexpr std::uint64_t kScenarioStream = 0x5ce7a210;
constexpr std::uint64_t kOracleStream = 0x1e33a1;
constexpr std::uint64_t kDetectorStream = 0xde7ec7;

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Points where either density may be non-smooth or concentrated.
std::vector<double> breakpoints(const Distribution& d) {
    if (const auto* u = std::get_if<Uniform>(&d)) return {u->lo, u->hi};
    return {mean(d)};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

void ScenarioSpec::validate() const {
    ccpd::validate(pre);
    ccpd::validate(post);
    if (change_time == 0 || change_time >= length) {
        throw std::invalid_argument("scenario change_time must satisfy 0 < change_time < length");
    }
}

ScenarioSpec example1(std::uint64_t seed, double mu) {
    ScenarioSpec s;
    s.id = mu == 0.1 ? "example1" : "example1_mu" + format_number(mu);
    s.pre = Gaussian{0.0, kSigma};
    s.post = Gaussian{mu, kSigma};
    s.change_time = 50;
    s.length = 100;
    s.seed = seed;
    return s;
}

ScenarioSpec example2(std::uint64_t seed) {
    ScenarioSpec s;
    s.id = "example2";
    s.pre = Gaussian{0.0, kSigma};
    s.post = Gaussian{0.0, 0.2};
    s.change_time = 50;
    s.length = 80;
    s.seed = seed;
    return s;
}

ScenarioSpec example3(std::uint64_t seed, UniformSupport support) {
    ScenarioSpec s;
    const double half = support == UniformSupport::MomentMatched ? kSigma * std::sqrt(3.0)
                                                                 : kSigma / std::sqrt(3.0);
    s.id = support == UniformSupport::MomentMatched ? "example3" : "example3_narrow";
    s.pre = Gaussian{0.0, kSigma};
    s.post = Uniform{-half, half};
    s.change_time = 50;
    s.length = 100;
    s.seed = seed;
    return s;
}

ScenarioSpec example_scenario(int which, std::uint64_t seed) {
    switch (which) {
        case 1: return example1(seed);
        case 2: return example2(seed);
        case 3: return example3(seed);
        default: throw std::invalid_argument("example must be 1, 2 or 3");
    }
}

std::vector<double> generate(const ScenarioSpec& scenario, std::size_t rep) {
    scenario.validate();
    CounterRng rng(derive_key({kScenarioStream, scenario.seed, rep}));
    std::vector<double> xs(scenario.length);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = draw(i < scenario.change_time ? scenario.pre : scenario.post, rng);
    }
    return xs;
}

double js_divergence(const Distribution& p, const Distribution& q) {
    validate(p);
    validate(q);
    const double spread = std::max(stddev(p), stddev(q));

    std::vector<double> cuts = breakpoints(p);
    const auto more = breakpoints(q);
    cuts.insert(cuts.end(), more.begin(), more.end());
    std::sort(cuts.begin(), cuts.end());
    const double lo = cuts.front() - 10.0 * spread;
    const double hi = cuts.back() + 10.0 * spread;
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // 0.5 [p ln(p / m) + q ln(q / m)], m = (p + q) / 2
    auto integrand = [&](double x) {
        const double lp = log_pdf(p, x);
        const double lq = log_pdf(q, x);
        const double lm = log_add_exp(lp, lq) - std::numbers::ln2;
        double v = 0.0;
        if (std::isfinite(lp)) v += std::exp(lp) * (lp - lm);
        if (std::isfinite(lq)) v += std::exp(lq) * (lq - lm);
        return 0.5 * v;
    };

    // Bisect each piece until the Kronrod error estimate meets an absolute
    // budget proportional to the piece length.
    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    const double budget_per_unit = 1e-3 * kJsTolerance / (hi - lo);
    double total = 0.0;
    double total_error = 0.0;
    const std::function<void(double, double, int)> adapt = [&](double a, double b, int depth) {
        double error = 0.0;
        const double value = Rule::integrate(integrand, a, b, 0, 0.0, &error);
        if (error <= budget_per_unit * (b - a) || depth >= 40) {
            total += value;
            total_error += error;
            return;
        }
        const double mid = 0.5 * (a + b);
        adapt(a, mid, depth + 1);
        adapt(mid, b, depth + 1);
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) adapt(cuts[i], cuts[i + 1], 0);
    if (!(total_error <= kJsTolerance) || !std::isfinite(total)) {
        throw QuadratureFailure("js_divergence: error estimate " + format_number(total_error) +
                                " exceeds tolerance");
    }
    return std::clamp(total, 0.0, std::numbers::ln2);
}

Lemma1Report verify_lemma1(const Gaussian& p, const Gaussian& q, std::size_t tau, std::size_t t,
                           std::size_t mc_reps, std::uint64_t seed,
                           const std::function<double(double)>& f) {
    if (tau == 0 || tau >= t) throw std::invalid_argument("verify_lemma1: need 1 <= tau < t");
    if (mc_reps < 2) throw std::invalid_argument("verify_lemma1: need at least two replications");
    const auto log_ratio = [&](double x) { return log_pdf(p, x) - log_pdf(q, x); };

    std::vector<double> outputs(t);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < mc_reps; ++r) {
        CounterRng rng(derive_key({kOracleStream, seed, r}));
        for (std::size_t s = 0; s < t; ++s) {
            const double x = s < tau ? rng.normal(p.mean, p.std) : rng.normal(q.mean, q.std);
            outputs[s] = f ? f(x) : log_ratio(x);
        }
        const double v = contrastive_value(SplitView::at(outputs, tau));
        sum += v;
        sum_sq += v * v;
    }

    Lemma1Report report;
    report.reps = mc_reps;
    const double n = static_cast<double>(mc_reps);
    report.mc_mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * report.mc_mean * report.mc_mean) / (n - 1.0));
    report.std_error = std::sqrt(var / n);
    report.js = js_divergence(p, q);
    report.target = 2.0 * static_cast<double>(tau) * static_cast<double>(t - tau) * report.js /
                    static_cast<double>(t);
    const double diff = report.mc_mean - report.target;
    if (report.std_error > 0.0) {
        report.z = diff / report.std_error;
    } else {
        report.z = std::abs(diff) <= kJsTolerance ? 0.0 : std::copysign(
                                                               std::numeric_limits<double>::infinity(), diff);
    }
    return report;
}

bool js_lower_bound_check(std::span<const double> mu, std::span<const double> sigma) {
    const auto d = static_cast<Eigen::Index>(mu.size());
    if (d == 0 || sigma.size() != mu.size() * mu.size()) {
        throw std::invalid_argument("js_lower_bound_check: sigma must be dim x dim");
    }
    const Eigen::Map<const Eigen::VectorXd> m(mu.data(), d);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> s(
        sigma.data(), d, d);
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("js_lower_bound_check: sigma is not positive definite");
    }
    const double snr_sq = m.dot(llt.solve(m));
    const double snr = std::sqrt(snr_sq);
    if (snr > std::log(4.0 / 3.0) * (1.0 + 1e-12)) {
        throw std::invalid_argument("js_lower_bound_check: requires ||Sigma^{-1/2} mu|| <= ln(4/3)");
    }
    // JS is affine invariant, so the d-dimensional pair reduces to
    // N(0, 1) vs N(snr, 1) along the whitened mean direction.
    if (snr == 0.0) return true;
    return js_divergence(Gaussian{0.0, 1.0}, Gaussian{snr, 1.0}) >= snr_sq / 24.0;
}

double calibrate_cell(const BenchmarkCell& cell, const BenchmarkOptions& options) {
    cell.scenario.validate();
    const auto* pre = std::get_if<Gaussian>(&cell.scenario.pre);
    if (pre == nullptr) throw std::invalid_argument("benchmark: calibration needs a Gaussian pre-change law");

    CalibrationConfig cal;
    cal.reference_mean = pre->mean;
    cal.reference_std = pre->std;
    cal.n = options.calibration_n;
    cal.reps = options.calibration_reps;
    cal.rank = options.calibration_rank;
    cal.spec = cell.spec;
    cal.warmup = options.warmup;
    cal.margin = options.margin;
    cal.seed = options.seed;
    cal.threads = options.threads;
    return calibrate(cal);
}

BenchmarkRow run_benchmark_cell(const BenchmarkCell& cell, const BenchmarkOptions& options,
                                std::optional<double> threshold) {
    cell.scenario.validate();
    BenchmarkRow row;
    row.scenario = cell.scenario.id;
    row.family = cell.spec.label();
    row.threshold = threshold ? *threshold : calibrate_cell(cell, options);

    DetectorConfig det;
    det.threshold = row.threshold;
    det.spec = cell.spec;
    det.warmup = options.warmup;
    det.margin = options.margin;

    std::vector<std::optional<std::size_t>> stops(options.reps);
    parallel_for(options.reps, options.threads, [&](std::size_t rep) {
        DetectorConfig local = det;
        local.seed = derive_key({kDetectorStream, options.seed, rep});
        stops[rep] = run(generate(cell.scenario, rep), local).stopping_time;
    });

    row.stopping_times = stops;
    std::vector<double> delays;
    for (const auto& stop : stops) {
        if (!stop) {
            ++row.misses;
            row.rep_delays.emplace_back(std::nullopt);
        } else if (*stop <= cell.scenario.change_time) {
            ++row.false_alarms;
            row.rep_delays.emplace_back(std::nullopt);
        } else {
            const double delay = static_cast<double>(*stop - cell.scenario.change_time);
            delays.push_back(delay);
            row.rep_delays.emplace_back(delay);
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.mean_delay = nan;
    row.std_delay = nan;
    if (!delays.empty()) {
        double s = 0.0;
        for (double v : delays) s += v;
        row.mean_delay = s / static_cast<double>(delays.size());
    }
    if (delays.size() >= 2) {
        double ss = 0.0;
        for (double v : delays) ss += (v - row.mean_delay) * (v - row.mean_delay);
        row.std_delay = std::sqrt(ss / static_cast<double>(delays.size() - 1));
    }
    return row;
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkCell>& cells,
                                        const BenchmarkOptions& options) {
    if (options.reps < 2) throw std::invalid_argument("benchmark requires reps >= 2");
    // Calibration only depends on the family and the pre-change law.
    std::map<std::string, double> thresholds;
    auto calibration_key = [](const BenchmarkCell& cell) {
        const auto& a = cell.spec.optimizer;
        std::ostringstream key;
        key << std::setprecision(17) << cell.spec.label() << '|' << cell.spec.clamp_bound << '|' << a.epochs
            << '|' << a.learning_rate << '|' << a.beta1 << '|' << a.beta2 << '|' << a.epsilon << '|'
            << mean(cell.scenario.pre) << '|' << stddev(cell.scenario.pre);
        return key.str();
    };

    std::vector<BenchmarkRow> rows;
    rows.reserve(cells.size());
    for (const auto& cell : cells) {
        const std::string key = calibration_key(cell);
        auto it = thresholds.find(key);
        if (it == thresholds.end()) it = thresholds.emplace(key, calibrate_cell(cell, options)).first;
        rows.push_back(run_benchmark_cell(cell, options, it->second));
    }
    return rows;
}

std::vector<BenchmarkCell> table1_cells(std::uint64_t seed) {
    const std::vector<std::pair<ScenarioSpec, std::vector<const char*>>> layout = {
        {example1(derive_key({seed, 1})), {"poly:1", "fourier:2", "mlp:1,2,3,1"}},
        {example2(derive_key({seed, 2})), {"poly:2", "fourier:3", "mlp:1,2,3,1"}},
        {example3(derive_key({seed, 3})), {"poly:5", "fourier:6", "mlp:1,2,3,1"}},
    };
    std::vector<BenchmarkCell> cells;
    for (const auto& [scenario, families] : layout) {
        for (const char* f : families) cells.push_back({scenario, parse_family(f)});
    }
    return cells;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
    out << "# schema_version=1\n";
    out << "scenario,family,threshold,mean_delay,std_delay,misses,rep_delays,false_alarms\n";
    for (const auto& row : rows) {
        std::string delays;
        for (std::size_t i = 0; i < row.rep_delays.size(); ++i) {
            if (i) delays += ';';
            if (row.rep_delays[i]) {
                delays += format_number(*row.rep_delays[i]);
            } else {
                const bool alarmed = i < row.stopping_times.size() && row.stopping_times[i].has_value();
                delays += alarmed ? "false_alarm" : "miss";
            }
        }
        out << row.scenario << ',' << '"' << row.family << '"' << ',' << format_number(row.threshold) << ','
            << format_number(row.mean_delay) << ',' << format_number(row.std_delay) << ',' << row.misses
            << ',' << delays << ',' << row.false_alarms << '\n';
    }
}

}  // namespace ccpd
