#pragma once

// Synthetic scenarios, divergence oracles and the detection-delay benchmark.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccpd/discriminator.hpp"
#include "ccpd/distributions.hpp"

namespace ccpd {

struct ScenarioSpec {
    std::string id;
    Distribution pre = Gaussian{};
    Distribution post = Gaussian{};
    std::size_t change_time = 50;  // number of pre-change samples
    std::size_t length = 100;
    std::size_t reps = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

// Support used for the uniform post-change law of example 3.
enum class UniformSupport {
    // [-σ√3, σ√3]: same mean and variance as N(0, σ²).
    MomentMatched,
    // [-σ/√3, σ/√3], a narrower law with variance σ²/9.
    Narrow,
};

// Mean shift N(0, σ²) -> N(mu, σ²), σ = 0.1, 50 + 50 samples.
ScenarioSpec example1(std::uint64_t seed, double mu = 0.1);
// Variance change N(0, 0.1²) -> N(0, 0.2²), 50 + 30 samples.
ScenarioSpec example2(std::uint64_t seed);
// Gaussian N(0, 0.1²) -> uniform, 50 + 50 samples.
ScenarioSpec example3(std::uint64_t seed, UniformSupport support = UniformSupport::MomentMatched);
// example1/2/3 by number; throws std::invalid_argument otherwise.
ScenarioSpec example_scenario(int which, std::uint64_t seed);

// Replication `rep` of the scenario: change_time draws from pre, the rest
// from post. Deterministic in (scenario.seed, rep).
std::vector<double> generate(const ScenarioSpec& scenario, std::size_t rep);

// Jensen-Shannon divergence by adaptive Gauss-Kronrod quadrature, absolute
// tolerance 1e-8. Throws QuadratureFailure when the tolerance is not met.
double js_divergence(const Distribution& p, const Distribution& q);

struct Lemma1Report {
    double mc_mean = 0.0;
    double std_error = 0.0;
    double js = 0.0;
    double target = 0.0;  // 2 tau (t - tau) JS / t
    double z = 0.0;
    std::size_t reps = 0;
};

// Monte-Carlo mean of the contrastive functional at f (default: the exact
// log density ratio ln p/q) over streams with a change after tau samples,
// compared with 2 tau (t - tau) JS(p, q) / t.
Lemma1Report verify_lemma1(const Gaussian& p, const Gaussian& q, std::size_t tau, std::size_t t,
                           std::size_t mc_reps, std::uint64_t seed,
                           const std::function<double(double)>& f = {});

// Checks JS(N(0, Σ), N(mu, Σ)) >= mu' Σ^{-1} mu / 24. Requires
// sqrt(mu' Σ^{-1} mu) <= ln(4/3); `sigma` is dim x dim row-major.
bool js_lower_bound_check(std::span<const double> mu, std::span<const double> sigma);

struct BenchmarkCell {
    ScenarioSpec scenario;
    DiscriminatorSpec spec;
};

struct BenchmarkRow {
    std::string scenario;
    std::string family;
    double threshold = 0.0;
    // Alarm time per replication (nullopt: no alarm).
    std::vector<std::optional<std::size_t>> stopping_times;
    // nullopt for a replication without a post-change alarm.
    std::vector<std::optional<double>> rep_delays;
    double mean_delay = 0.0;  // NaN when every replication missed
    double std_delay = 0.0;   // sample std (n - 1); NaN for fewer than two delays
    std::size_t misses = 0;        // no alarm by the end of the stream
    std::size_t false_alarms = 0;  // alarm at or before the change time
};

struct BenchmarkOptions {
    std::size_t reps = 10;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::size_t warmup = 20;
    std::size_t margin = 10;
    std::size_t calibration_n = 150;
    std::size_t calibration_reps = 10;
    std::size_t calibration_rank = 2;
};

// Bootstrap threshold for the cell's family against its (Gaussian)
// pre-change law. Depends on options.seed but not on the scenario seed, so
// cells sharing a family and pre-change law share a threshold.
double calibrate_cell(const BenchmarkCell& cell, const BenchmarkOptions& options);

// Runs the detector on `options.reps` replications of the scenario, using
// `threshold` or calibrate_cell() when absent.
BenchmarkRow run_benchmark_cell(const BenchmarkCell& cell, const BenchmarkOptions& options,
                                std::optional<double> threshold = std::nullopt);
std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkCell>& cells,
                                        const BenchmarkOptions& options);

// The nine synthetic cells: examples 1-3 crossed with polynomial, Fourier
// and (1,2,3,1) network families.
std::vector<BenchmarkCell> table1_cells(std::uint64_t seed);

// Columns: scenario,family,threshold,mean_delay,std_delay,misses,rep_delays,false_alarms
// preceded by a "# schema_version=1" line. rep_delays is ';'-joined with
// "miss"/"false_alarm" for replications without a valid delay.
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace ccpd
