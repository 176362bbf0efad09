#pragma once

// Online contrastive change-point detector.
//
// At every step t after the warm-up the detector fits a discriminator for
// each admissible split tau in {margin, ..., n - margin} of the current
// window (n = t, or the most recent window_cap samples), evaluates the
// contrastive functional of each fit and raises an alarm as soon as the
// maximum S_t exceeds the threshold.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ccpd/buffer.hpp"
#include "ccpd/discriminator.hpp"

namespace ccpd {

struct DetectorConfig {
    double threshold = std::numeric_limits<double>::infinity();
    DiscriminatorSpec spec;
    std::size_t warmup = 20;
    std::size_t margin = 10;
    // Sliding-window horizon; splits only use the most recent window_cap samples.
    std::optional<std::size_t> window_cap;
    std::uint64_t seed = 0;
    // Start each fit from the previous step's parameters at the same tau.
    bool warm_start = false;
    // Workers for the per-split fits; 0 uses every core. Results do not
    // depend on this value.
    unsigned threads = 1;

    void validate() const;
};

struct TracePoint {
    std::size_t t = 0;
    double statistic = 0.0;
    // Split achieving the maximum, as a 1-based index into the full stream.
    // Diagnostic only; it is not a localisation estimate with guarantees.
    std::size_t tau_hat = 0;

    bool operator==(const TracePoint&) const = default;
};

struct Alarm {
    std::size_t t = 0;
    std::size_t tau_hat = 0;
    double statistic = 0.0;
};

struct DetectionResult {
    std::optional<std::size_t> stopping_time;
    std::optional<std::size_t> tau_hat;
    std::optional<double> statistic;
    std::vector<TracePoint> trace;

    // Largest recorded statistic, or nullopt for an empty trace.
    std::optional<double> max_statistic() const;
};

// S_t for the window [begin, end) of `buffer`, fitting one discriminator per
// admissible split. Returns nullopt when no split is admissible.
// `global_t` and the split index seed each fit.
std::optional<TracePoint> compute_statistic(const ObservationBuffer& buffer, std::size_t begin,
                                            std::size_t end, const DetectorConfig& config);

class Detector {
public:
    explicit Detector(DetectorConfig config, std::size_t dim = 1);

    // Consumes one observation. Returns an alarm when S_t exceeds the
    // threshold; after that the detector is frozen and further calls throw
    // AlreadyAlarmed.
    std::optional<Alarm> step(std::span<const double> x);
    std::optional<Alarm> step(double x) { return step(std::span<const double>(&x, 1)); }

    const DetectorConfig& config() const noexcept { return config_; }
    const ObservationBuffer& buffer() const noexcept { return buffer_; }
    const std::vector<TracePoint>& trace() const noexcept { return trace_; }
    std::size_t t() const noexcept { return buffer_.size(); }
    bool alarmed() const noexcept { return alarm_.has_value(); }
    const std::optional<Alarm>& alarm() const noexcept { return alarm_; }

    DetectionResult result() const;

private:
    DetectorConfig config_;
    ObservationBuffer buffer_;
    std::vector<TracePoint> trace_;
    std::optional<Alarm> alarm_;
    std::map<std::size_t, std::vector<double>> warm_params_;  // keyed by global tau
};

// Feeds `stream` through a fresh detector until the first alarm or the end.
DetectionResult run(const ObservationBuffer& stream, const DetectorConfig& config);
DetectionResult run(std::span<const double> scalar_stream, const DetectorConfig& config);

}  // namespace ccpd
