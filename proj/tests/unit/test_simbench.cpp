#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "ccpd/contrast.hpp"
#include "ccpd/errors.hpp"
#include "ccpd/rng.hpp"
#include "ccpd/simbench.hpp"
#include "doctest.h"

using namespace ccpd;

namespace {

double mean_of(const std::vector<double>& v, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += v[i];
    return s / static_cast<double>(e - b);
}

// Monte-Carlo JS estimate: half the mean of ln(2p/(p+q)) under p plus
// the same under q.
std::pair<double, double> js_monte_carlo(const Gaussian& p, const Gaussian& q, std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    auto term = [&](const Gaussian& a, const Gaussian& b) {
        std::vector<double> v(n);
        for (auto& x : v) {
            const double s = rng.normal(a.mean, a.std);
            const double pa = pdf(a, s), pb = pdf(b, s);
            x = std::log(2 * pa / (pa + pb));
        }
        return v;
    };
    const auto a = term(p, q);
    const auto b = term(q, p);
    double m = 0.0;
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = 0.5 * (a[i] + b[i]);
        m += c[i];
    }
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double x : c) var += (x - m) * (x - m);
    var /= static_cast<double>(n - 1);
    return {m, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

TEST_CASE("example 1 stream segments have the expected means") {
    for (std::size_t rep = 0; rep < 5; ++rep) {
        const auto x = generate(example1(7), rep);
        REQUIRE(x.size() == 100);
        const double tol = 4 * 0.1 / std::sqrt(50.0);
        CHECK(std::abs(mean_of(x, 0, 50)) <= tol);
        CHECK(std::abs(mean_of(x, 50, 100) - 0.1) <= tol);
    }
}

TEST_CASE("scenario shapes and determinism") {
    const auto e2 = example2(3);
    CHECK(e2.change_time == 50);
    CHECK(e2.length == 80);
    CHECK(generate(e2, 0).size() == 80);
    CHECK(generate(e2, 4) == generate(e2, 4));
    CHECK(generate(e2, 4) != generate(e2, 5));
    CHECK(generate(example2(3), 0) != generate(example2(4), 0));

    auto one_post = example1(1);
    one_post.change_time = one_post.length - 1;
    const auto x = generate(one_post, 0);
    CHECK(x.size() == one_post.length);

    CHECK(example_scenario(1, 9).id == "example1");
    CHECK(example_scenario(3, 9).id == example3(9).id);
    CHECK_THROWS_AS(example_scenario(4, 9), std::invalid_argument);
    CHECK(example1(1, 0.4).id != example1(1).id);
}

TEST_CASE("example 2 keeps the mean fixed") {
    const auto s = example2(11);
    for (std::size_t rep = 0; rep < 5; ++rep) {
        const auto x = generate(s, rep);
        const double diff = mean_of(x, 50, 80) - mean_of(x, 0, 50);
        const double se = std::sqrt(0.01 / 50 + 0.04 / 30);
        CHECK(std::abs(diff) <= 4 * se);
    }
}

TEST_CASE("example 3 uniform supports") {
    const auto mm = std::get<Uniform>(example3(1).post);
    const double s = 0.1;
    CHECK(mm.hi == doctest::Approx(s * std::sqrt(3.0)).epsilon(1e-15));
    CHECK(mm.lo == doctest::Approx(-s * std::sqrt(3.0)).epsilon(1e-15));
    CHECK(mean(mm) == doctest::Approx(0.0));
    CHECK(stddev(mm) == doctest::Approx(s).epsilon(1e-14));
    CHECK((mm.hi - mm.lo) * (mm.hi - mm.lo) / 12 == doctest::Approx(s * s).epsilon(1e-14));

    const auto narrow = std::get<Uniform>(example3(1, UniformSupport::Narrow).post);
    CHECK(narrow.hi == doctest::Approx(s / std::sqrt(3.0)).epsilon(1e-15));

    const auto x = generate(example3(2), 0);
    for (std::size_t i = 50; i < 100; ++i) {
        CHECK(x[i] >= mm.lo);
        CHECK(x[i] <= mm.hi);
    }
}

TEST_CASE("distribution helpers") {
    const Gaussian g{1.0, 2.0};
    CHECK(pdf(g, 1.0) == doctest::Approx(1.0 / (2.0 * std::sqrt(2 * std::numbers::pi))));
    CHECK(log_pdf(g, 3.0) == doctest::Approx(std::log(pdf(g, 3.0))));
    const Uniform u{-1.0, 3.0};
    CHECK(pdf(u, 0.0) == 0.25);
    CHECK(pdf(u, 4.0) == 0.0);
    CHECK(log_pdf(u, 4.0) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(validate(Gaussian{0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Uniform{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("JS divergence reference cases") {
    const Gaussian p{0.0, 0.1};
    CHECK(std::abs(js_divergence(p, p)) <= 1e-8);
    CHECK(std::abs(js_divergence(Uniform{0, 1}, Uniform{0, 1})) <= 1e-8);
    CHECK(std::abs(js_divergence(Uniform{0, 1}, Uniform{2, 3}) - std::log(2.0)) <= 1e-8);
    CHECK(std::abs(js_divergence(Uniform{0, 1}, Uniform{1, 2}) - std::log(2.0)) <= 1e-8);
    // Half-overlapping uniforms: JS = ln 2 / 2.
    CHECK(std::abs(js_divergence(Uniform{0, 2}, Uniform{1, 3}) - std::log(2.0) / 2) <= 1e-8);
}

TEST_CASE("JS divergence agrees with a Monte-Carlo estimate") {
    const Gaussian p{0.0, 0.1}, q{0.1, 0.1};
    const double js = js_divergence(p, q);
    const auto [mc, se] = js_monte_carlo(p, q, 1000000, 2024);
    CHECK(std::abs(js - mc) <= 3 * se);
}

TEST_CASE("JS divergence is symmetric and bounded") {
    CounterRng rng(5);
    for (int i = 0; i < 10; ++i) {
        const Gaussian p{rng.normal(), 0.1 + rng.uniform() * 3};
        const Gaussian q{rng.normal(), 0.1 + rng.uniform() * 3};
        const double a = js_divergence(p, q);
        CHECK(std::abs(a - js_divergence(q, p)) <= 1e-8);
        CHECK(a >= 0.0);
        CHECK(a <= std::log(2.0));
    }
    const double gu = js_divergence(Gaussian{0.0, 0.1}, Uniform{-0.1 * std::sqrt(3.0), 0.1 * std::sqrt(3.0)});
    CHECK(gu > 0.0);
    CHECK(std::abs(gu - js_divergence(Uniform{-0.1 * std::sqrt(3.0), 0.1 * std::sqrt(3.0)}, Gaussian{0.0, 0.1})) <=
          1e-8);
}

TEST_CASE("expected functional of the log density ratio") {
    const Gaussian p{0.0, 0.1};
    const auto same = verify_lemma1(p, p, 50, 100, 2000, 1);
    CHECK(same.target == doctest::Approx(0.0).epsilon(1e-8).scale(1e-8));
    CHECK(std::abs(same.z) <= 4);

    const Gaussian q{0.1, 0.1};
    const auto r = verify_lemma1(p, q, 50, 100, 4000, 2);
    CHECK(r.target == doctest::Approx(2.0 * 50 * 50 / 100 * js_divergence(p, q)));
    CHECK(std::abs(r.z) <= 4);

    // Any other discriminator does no better in expectation.
    const auto half = verify_lemma1(
        p, q, 50, 100, 4000, 3, [&](double x) { return 0.5 * (log_pdf(p, x) - log_pdf(q, x)); });
    CHECK(half.mc_mean <= half.target + 4 * half.std_error);
    const auto zero = verify_lemma1(p, q, 30, 100, 100, 4, [](double) { return 0.0; });
    CHECK(zero.mc_mean == 0.0);
}

TEST_CASE("JS lower bound") {
    const double edge = std::log(4.0 / 3.0);
    CHECK(js_lower_bound_check(std::vector<double>{0.0}, std::vector<double>{1.0}));
    CHECK(js_lower_bound_check(std::vector<double>{0.2}, std::vector<double>{1.0}));
    CHECK(js_lower_bound_check(std::vector<double>{0.1 * edge}, std::vector<double>{0.01}));
    CHECK(js_lower_bound_check(std::vector<double>{edge}, std::vector<double>{1.0}));
    CHECK(js_lower_bound_check(std::vector<double>{0.1, 0.05}, std::vector<double>{1.0, 0.3, 0.3, 0.5}));
}

TEST_CASE("benchmark rows") {
    BenchmarkOptions o;
    o.reps = 3;
    o.seed = 4;
    o.calibration_n = 60;
    o.calibration_reps = 3;
    o.calibration_rank = 1;
    auto spec = parse_family("poly:1");
    spec.optimizer.epochs = 15;
    BenchmarkCell cell{example1(4, 0.4), spec};
    const auto row = run_benchmark_cell(cell, o);
    CHECK(row.scenario == cell.scenario.id);
    CHECK(row.family == "poly:1");
    CHECK(row.threshold == calibrate_cell(cell, o));
    REQUIRE(row.rep_delays.size() == 3);
    REQUIRE(row.stopping_times.size() == 3);

    std::vector<double> delays;
    std::size_t misses = 0, false_alarms = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& st = row.stopping_times[i];
        if (!st) {
            ++misses;
            CHECK_FALSE(row.rep_delays[i]);
        } else if (*st <= 50) {
            ++false_alarms;
            CHECK_FALSE(row.rep_delays[i]);
        } else {
            REQUIRE(row.rep_delays[i]);
            CHECK(*row.rep_delays[i] == static_cast<double>(*st) - 50);
            delays.push_back(*row.rep_delays[i]);
        }
    }
    CHECK(row.misses == misses);
    CHECK(row.false_alarms == false_alarms);
    if (!delays.empty()) {
        double m = 0.0;
        for (double d : delays) m += d;
        m /= static_cast<double>(delays.size());
        CHECK(row.mean_delay == doctest::Approx(m));
    }

    o.threads = 3;
    const auto again = run_benchmark_cell(cell, o);
    CHECK(again.stopping_times == row.stopping_times);
    CHECK(again.threshold == row.threshold);

    o.reps = 1;
    CHECK_THROWS(run_benchmark({cell}, o));
}

TEST_CASE("nine benchmark cells") {
    const auto cells = table1_cells(7);
    REQUIRE(cells.size() == 9);
    CHECK(cells[0].spec.label() == "poly:1");
    CHECK(cells[1].spec.label() == "fourier:2");
    CHECK(cells[2].spec.label() == "mlp:1,2,3,1");
    CHECK(cells[3].spec.label() == "poly:2");
    CHECK(cells[4].spec.label() == "fourier:3");
    CHECK(cells[6].spec.label() == "poly:5");
    CHECK(cells[7].spec.label() == "fourier:6");
    CHECK(cells[8].spec.label() == "mlp:1,2,3,1");
}

TEST_CASE("benchmark CSV layout") {
    BenchmarkRow row;
    row.scenario = "example1";
    row.family = "mlp:1,2,3,1";
    row.threshold = 1.5;
    row.stopping_times = {60, std::nullopt, 40};
    row.rep_delays = {10.0, std::nullopt, std::nullopt};
    row.mean_delay = 10.0;
    row.std_delay = std::nan("");
    row.misses = 1;
    row.false_alarms = 1;
    std::ostringstream out;
    write_benchmark_csv(out, {row});
    const std::string expected =
        "# schema_version=1\n"
        "scenario,family,threshold,mean_delay,std_delay,misses,rep_delays,false_alarms\n"
        "example1,\"mlp:1,2,3,1\",1.5,10,nan,1,10;miss;false_alarm,1\n";
    CHECK(out.str() == expected);
}
