#include "ccpd/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "ccpd/detector.hpp"
#include "ccpd/errors.hpp"
#include "ccpd/parallel.hpp"
#include "ccpd/rng.hpp"

namespace ccpd {

namespace {

// Domain tag separating calibration streams from scenario streams that
// share a user seed.
constexpr std::uint64_t kCalibrationStream = 0xca11b4a7e;

}  // namespace

void CalibrationConfig::validate() const {
    if (!(reference_std > 0.0) || !std::isfinite(reference_std)) {
        throw DegenerateReference("calibration reference std must be positive, got " +
                                  std::to_string(reference_std));
    }
    if (!std::isfinite(reference_mean)) throw std::invalid_argument("calibration reference mean must be finite");
    if (rank < 1 || reps < rank) throw std::invalid_argument("calibration requires reps >= rank >= 1");
    if (n <= warmup) throw std::invalid_argument("calibration stream length must exceed the warm-up");
    if (n < 2 * margin) throw std::invalid_argument("calibration stream too short for the margin");
    spec.validate();
}

double upper_order_statistic(std::span<const double> values, std::size_t rank) {
    if (rank < 1 || rank > values.size()) {
        throw std::invalid_argument("upper_order_statistic: rank out of range");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted[rank - 1];
}

std::vector<double> reference_stream(const CalibrationConfig& config, std::size_t rep) {
    CounterRng rng(derive_key({kCalibrationStream, config.seed, rep}));
    std::vector<double> xs(config.n);
    for (double& x : xs) x = rng.normal(config.reference_mean, config.reference_std);
    return xs;
}

std::vector<double> null_maxima(const CalibrationConfig& config) {
    config.validate();

    DetectorConfig det;
    det.threshold = std::numeric_limits<double>::infinity();
    det.spec = config.spec;
    det.warmup = config.warmup;
    det.margin = config.margin;
    det.threads = 1;

    std::vector<double> maxima(config.reps);
    parallel_for(config.reps, config.threads, [&](std::size_t rep) {
        DetectorConfig local = det;
        local.seed = derive_key({config.seed, rep});
        const auto result = run(reference_stream(config, rep), local);
        const auto m = result.max_statistic();
        if (!m) throw std::logic_error("calibration replication produced no statistic");
        maxima[rep] = *m;
    });
    return maxima;
}

double calibrate(const CalibrationConfig& config) {
    const auto maxima = null_maxima(config);
    return upper_order_statistic(maxima, config.rank);
}

}  // namespace ccpd
