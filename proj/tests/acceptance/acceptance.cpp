// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ccpd/calibration.hpp"
#include "ccpd/contrast.hpp"
#include "ccpd/detector.hpp"
#include "ccpd/discriminator.hpp"
#include "ccpd/rng.hpp"
#include "ccpd/simbench.hpp"

using namespace ccpd;

namespace {

constexpr std::uint64_t kSeed = 7;

struct Verdict {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("%s criterion %d: %s | %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(),
                secs);
    std::fflush(stdout);
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

std::string describe(const BenchmarkRow& row) {
    std::string s = row.scenario + " " + row.family + ": threshold " + fmt(row.threshold) + ", mean delay " +
                    fmt(row.mean_delay) + " +- " + fmt(row.std_delay) + ", misses " + std::to_string(row.misses) +
                    ", false alarms " + std::to_string(row.false_alarms) + ", delays [";
    for (std::size_t i = 0; i < row.rep_delays.size(); ++i) {
        if (i) s += ' ';
        if (row.rep_delays[i]) {
            s += fmt(*row.rep_delays[i]);
        } else {
            s += row.stopping_times[i] ? "FA" : "miss";
        }
    }
    return s + "]";
}

// Independent forward pass of a dense ReLU network; returns the smallest
// absolute hidden pre-activation over the inputs.
double min_hidden_preactivation(const std::vector<int>& widths, const std::vector<double>& params,
                                const std::vector<double>& inputs) {
    double smallest = std::numeric_limits<double>::infinity();
    const std::size_t in0 = static_cast<std::size_t>(widths.front());
    for (std::size_t s = 0; s < inputs.size() / in0; ++s) {
        std::vector<double> a(inputs.begin() + static_cast<std::ptrdiff_t>(s * in0),
                              inputs.begin() + static_cast<std::ptrdiff_t>((s + 1) * in0));
        std::size_t offset = 0;
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const std::size_t n_in = static_cast<std::size_t>(widths[l]);
            const std::size_t n_out = static_cast<std::size_t>(widths[l + 1]);
            std::vector<double> z(n_out);
            for (std::size_t o = 0; o < n_out; ++o) {
                double acc = params[offset + n_out * n_in + o];
                for (std::size_t i = 0; i < n_in; ++i) acc += params[offset + o * n_in + i] * a[i];
                z[o] = acc;
            }
            offset += n_out * n_in + n_out;
            const bool hidden = l + 2 < widths.size();
            if (hidden) {
                for (double& v : z) {
                    smallest = std::min(smallest, std::abs(v));
                    v = std::max(v, 0.0);
                }
            }
            a = z;
        }
    }
    return smallest;
}

Verdict gradient_check() {
    const std::vector<std::string> families{"poly:3", "fourier:4", "linear:2", "mlp:1,2,3,1"};
    const double h = 1e-6;
    double worst = 0.0;
    std::string worst_family;
    std::size_t configs = 0;
    for (const auto& text : families) {
        const auto spec = parse_family(text);
        const std::size_t dim = spec.input_dim();
        CounterRng rng(derive_key({kSeed, 0x9ad, spec.num_params()}));
        int accepted = 0;
        while (accepted < 100) {
            const std::size_t n_pre = 5 + static_cast<std::size_t>(rng.uniform() * 30);
            const std::size_t n_post = 5 + static_cast<std::size_t>(rng.uniform() * 30);
            const double shift = rng.normal(0.0, 0.5);
            std::vector<double> pre(n_pre * dim), post(n_post * dim);
            for (auto& x : pre) x = rng.normal(0.0, 0.5);
            for (auto& x : post) x = rng.normal(shift, 0.5);
            std::vector<double> params(spec.num_params());
            for (auto& p : params) p = rng.normal(0.0, 1.0);

            // Only points where every output is strictly inside the clamp and,
            // for the network, every ReLU is away from its kink.
            bool interior = true;
            for (const auto* v : {&pre, &post}) {
                for (std::size_t s = 0; s < v->size() / dim; ++s) {
                    const std::span<const double> x(v->data() + s * dim, dim);
                    if (std::abs(evaluate_raw(spec, params, x)) >= spec.clamp_bound - 1e-3) interior = false;
                }
            }
            if (const auto* mlp = std::get_if<Mlp>(&spec.family)) {
                std::vector<double> all(pre);
                all.insert(all.end(), post.begin(), post.end());
                if (min_hidden_preactivation(mlp->widths, params, all) < 1e-4) interior = false;
            }
            if (!interior) continue;

            const SampleView vpre(pre, dim), vpost(post, dim);
            const auto analytic = objective(spec, params, vpre, vpost).gradient;
            double diff = 0.0, norm = 0.0;
            for (std::size_t k = 0; k < params.size(); ++k) {
                auto up = params, down = params;
                up[k] += h;
                down[k] -= h;
                const double fd =
                    (objective(spec, up, vpre, vpost).value - objective(spec, down, vpre, vpost).value) / (2 * h);
                diff += (analytic[k] - fd) * (analytic[k] - fd);
                norm += fd * fd;
            }
            const double rel = std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300);
            if (rel > worst) {
                worst = rel;
                worst_family = text;
            }
            ++accepted;
            ++configs;
        }
    }
    return {worst <= 1e-5, std::to_string(configs) + " configurations, worst relative error " + fmt(worst) + " (" +
                               worst_family + "), tolerance 1e-05"};
}

Verdict optimal_functional_check() {
    const auto r = verify_lemma1(Gaussian{0.0, 0.1}, Gaussian{0.1, 0.1}, 50, 100, 10000, kSeed);
    return {std::abs(r.z) <= 4.0, "MC mean " + fmt(r.mc_mean, 6) + " +- " + fmt(r.std_error, 3) + ", target " +
                                      fmt(r.target, 6) + " (JS " + fmt(r.js, 6) + "), z = " + fmt(r.z, 3)};
}

Verdict js_check() {
    const double ln2 = std::numbers::ln2;
    std::vector<std::string> problems;
    double worst_self = 0.0;
    for (const Distribution& d : std::vector<Distribution>{Gaussian{0.0, 0.1}, Gaussian{3.0, 2.0}, Uniform{-1, 1},
                                                            Uniform{0.0, 0.01}}) {
        worst_self = std::max(worst_self, std::abs(js_divergence(d, d)));
    }
    if (worst_self > 1e-8) problems.push_back("JS(p,p) = " + fmt(worst_self));

    double worst_disjoint = 0.0;
    for (const auto& [p, q] : std::vector<std::pair<Uniform, Uniform>>{{{0, 1}, {2, 3}}, {{-5, -4}, {4, 5}},
                                                                        {{0, 0.1}, {0.1, 0.3}}}) {
        worst_disjoint = std::max(worst_disjoint, std::abs(js_divergence(p, q) - ln2));
    }
    if (worst_disjoint > 1e-8) problems.push_back("disjoint error " + fmt(worst_disjoint));

    CounterRng rng(derive_key({kSeed, 0x15}));
    double worst_sym = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Gaussian p{rng.normal(0.0, 1.0), 0.05 + 2.0 * rng.uniform()};
        const Gaussian q{rng.normal(0.0, 1.0), 0.05 + 2.0 * rng.uniform()};
        const double a = js_divergence(p, q);
        const double b = js_divergence(q, p);
        worst_sym = std::max(worst_sym, std::abs(a - b));
        if (a < 0.0 || a > ln2) problems.push_back("JS out of [0, ln 2]");
    }
    if (worst_sym > 1e-8) problems.push_back("asymmetry " + fmt(worst_sym));

    int bound_ok = 0;
    const double edge = std::log(4.0 / 3.0);
    for (int k = 0; k < 20; ++k) {
        const double delta = edge * k / 19.0;
        bool ok;
        if (k % 2 == 0) {
            const double sigma = 0.1;
            ok = js_lower_bound_check(std::vector<double>{delta * sigma}, std::vector<double>{sigma * sigma});
        } else {
            // Sigma = [[1, 0.5], [0.5, 1]], mu along (1, 1): mu' Sigma^-1 mu = 2 c^2 / 1.5.
            const double c = delta * std::sqrt(0.75);
            ok = js_lower_bound_check(std::vector<double>{c, c}, std::vector<double>{1.0, 0.5, 0.5, 1.0});
        }
        bound_ok += ok ? 1 : 0;
    }
    if (bound_ok != 20) problems.push_back("lower bound held at " + std::to_string(bound_ok) + "/20 points");

    std::string detail = "self " + fmt(worst_self) + ", disjoint " + fmt(worst_disjoint) + ", symmetry " +
                         fmt(worst_sym) + ", lower bound " + std::to_string(bound_ok) + "/20";
    for (const auto& p : problems) detail += "; " + p;
    return {problems.empty(), detail};
}

Verdict null_check() {
    std::vector<std::string> problems;
    for (std::size_t t : {2u, 10u, 150u}) {
        const std::vector<double> zeros(t, 0.0);
        for (std::size_t tau = 1; tau < t; ++tau) {
            if (contrastive_value(SplitView::at(zeros, tau)) != 0.0) problems.push_back("T(0) != 0");
        }
    }

    CalibrationConfig cal;
    cal.reference_mean = 0.0;
    cal.reference_std = 0.1;
    cal.spec = parse_family("poly:1");
    cal.seed = kSeed;
    const double z = calibrate(cal);

    // Fresh null streams from the same reference, on a separate seed.
    CalibrationConfig fresh = cal;
    fresh.seed = derive_key({kSeed, 0xf2e54});
    DetectorConfig det;
    det.threshold = z;
    det.spec = cal.spec;
    det.seed = derive_key({kSeed, 0xd37});
    int alarms = 0;
    std::size_t steps = 0;
    double min_stat = std::numeric_limits<double>::infinity();
    for (std::size_t rep = 0; rep < 20; ++rep) {
        const auto stream = reference_stream(fresh, rep);
        const auto r = run(stream, det);
        if (r.stopping_time) ++alarms;
        for (const auto& p : r.trace) min_stat = std::min(min_stat, p.statistic);
        steps += r.trace.size();
    }
    if (min_stat < 0.0) problems.push_back("negative S_t");
    if (alarms > 6) problems.push_back("too many null alarms");
    std::string detail = "threshold " + fmt(z) + ", " + std::to_string(alarms) + "/20 null streams alarmed (max 6), min S_t " +
                         fmt(min_stat) + " over " + std::to_string(steps) + " steps";
    for (const auto& p : problems) detail += "; " + p;
    return {problems.empty(), detail};
}

Verdict scaling_check() {
    BenchmarkOptions options;
    options.seed = kSeed;
    options.reps = 10;
    std::vector<BenchmarkCell> cells;
    for (double mu : {0.1, 0.2, 0.4}) cells.push_back({example1(kSeed, mu), parse_family("poly:1")});
    const auto rows = run_benchmark(cells, options);
    std::string detail;
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail += (i ? "; " : "") + describe(rows[i]);
        if (std::isnan(rows[i].mean_delay)) ok = false;
        if (i > 0 && !(rows[i].mean_delay <= rows[i - 1].mean_delay)) ok = false;
    }
    return {ok, detail};
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Verdict determinism_check() {
    const auto dir = std::filesystem::temp_directory_path() / "ccpd_acceptance";
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs;
    for (int threads : {1, 4}) {
        const auto path = dir / ("table1_threads" + std::to_string(threads) + ".csv");
        std::filesystem::remove(path);
        const std::string cmd = std::string("\"") + CCPD_CLI_PATH + "\" benchmark --table1 --seed 7 --threads " +
                                std::to_string(threads) + " --out \"" + path.string() + "\"";
        const int rc = std::system(cmd.c_str());
        if (rc != 0) return {false, "benchmark exited with status " + std::to_string(rc)};
        outputs.push_back(read_file(path));
    }
    std::size_t lines = 0;
    for (char c : outputs[0]) lines += c == '\n' ? 1 : 0;
    const bool same = outputs[0] == outputs[1] && !outputs[0].empty();
    return {same && lines == 11, std::string(same ? "byte-identical" : "outputs differ") + " CSV for --threads 1 and 4, " +
                                     std::to_string(outputs[0].size()) + " bytes, " + std::to_string(lines) +
                                     " lines (schema line, header, 9 rows)"};
}

}  // namespace

int main() {
    std::vector<BenchmarkRow> table;
    auto table_rows = [&]() -> const std::vector<BenchmarkRow>& {
        if (table.empty()) {
            BenchmarkOptions options;
            options.seed = kSeed;
            options.reps = 10;
            table = run_benchmark(table1_cells(kSeed), options);
        }
        return table;
    };

    report(4, "parameter gradients match central differences", gradient_check);
    report(5, "Monte-Carlo mean of the optimal functional matches 2 tau (t - tau) JS / t", optimal_functional_check);
    report(6, "JS divergence identities, symmetry and quadratic lower bound", js_check);
    report(7, "null behaviour and false-alarm control", null_check);
    report(1, "example 1 / poly:1 mean delay within 9.1 +- 4.4", [&]() -> Verdict {
        const auto& row = table_rows()[0];
        return {std::abs(row.mean_delay - 9.1) <= 2 * 2.2, describe(row)};
    });
    report(2, "example 2 / mlp:1,2,3,1 mean delay within 14.9 +- 11.2", [&]() -> Verdict {
        const auto& row = table_rows()[5];
        return {std::abs(row.mean_delay - 14.9) <= 2 * 5.6, describe(row)};
    });
    report(3, "example 3: fourier:6 mean delay exceeds poly:5", [&]() -> Verdict {
        const auto& poly = table_rows()[6];
        const auto& fourier = table_rows()[7];
        return {fourier.mean_delay > poly.mean_delay, describe(poly) + "; " + describe(fourier)};
    });
    report(8, "example 1 mean delay non-increasing in mu over {0.1, 0.2, 0.4}", scaling_check);
    report(9, "nine-cell benchmark CSV is reproducible across thread counts", determinism_check);

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
