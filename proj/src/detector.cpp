#include "ccpd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ccpd/contrast.hpp"
#include "ccpd/errors.hpp"
#include "ccpd/parallel.hpp"
#include "ccpd/rng.hpp"

namespace ccpd {

namespace {

using WarmStore = std::map<std::size_t, std::vector<double>>;

std::optional<TracePoint> window_statistic(const ObservationBuffer& buffer, std::size_t begin,
                                           std::size_t end, const DetectorConfig& config,
                                           WarmStore* warm) {
    const std::size_t n = end - begin;
    const std::size_t margin = config.margin;
    if (n < 2 * margin) return std::nullopt;

    const SampleView window = buffer.view(begin, end);
    const std::size_t first = margin;
    const std::size_t count = n - 2 * margin + 1;
    std::vector<SplitScore> scores(count);
    std::vector<std::vector<double>> params(warm ? count : 0);

    parallel_for(count, config.threads, [&](std::size_t i) {
        const std::size_t tau = first + i;
        const std::size_t global_tau = begin + tau;
        const std::uint64_t seed = derive_key({config.seed, global_tau, end});

        std::optional<std::span<const double>> init;
        if (warm) {
            if (const auto it = warm->find(global_tau); it != warm->end()) init = it->second;
        }
        auto fitted = fit(config.spec, window.slice(0, tau), window.slice(tau, n), seed, init);
        scores[i] = {tau, fitted.achieved_value};
        if (warm) params[i] = std::move(fitted.params);
    });

    if (warm) {
        for (std::size_t i = 0; i < count; ++i) (*warm)[begin + first + i] = std::move(params[i]);
    }

    const StatValue best = max_statistic(scores, n, margin);
    return TracePoint{end, best.value, begin + best.tau};
}

}  // namespace

void DetectorConfig::validate() const {
    spec.validate();
    if (std::isnan(threshold)) throw std::invalid_argument("threshold must not be NaN");
    if (margin < 1) throw std::invalid_argument("margin must be >= 1");
    if (window_cap && *window_cap < 2 * margin + 1) {
        throw std::invalid_argument("window_cap must be >= 2*margin + 1");
    }
}

std::optional<double> DetectionResult::max_statistic() const {
    if (trace.empty()) return std::nullopt;
    double best = trace.front().statistic;
    for (const auto& p : trace) best = std::max(best, p.statistic);
    return best;
}

std::optional<TracePoint> compute_statistic(const ObservationBuffer& buffer, std::size_t begin,
                                            std::size_t end, const DetectorConfig& config) {
    if (begin > end || end > buffer.size()) throw std::out_of_range("compute_statistic: bad window");
    return window_statistic(buffer, begin, end, config, nullptr);
}

Detector::Detector(DetectorConfig config, std::size_t dim) : config_(std::move(config)), buffer_(dim) {
    config_.validate();
    if (dim != config_.spec.input_dim()) {
        throw DimensionMismatch("Detector: stream dimension " + std::to_string(dim) +
                                " does not match discriminator input dimension " +
                                std::to_string(config_.spec.input_dim()));
    }
}

std::optional<Alarm> Detector::step(std::span<const double> x) {
    if (alarm_) throw AlreadyAlarmed("Detector: step called after an alarm");
    buffer_.append(x);

    const std::size_t t = buffer_.size();
    if (t <= config_.warmup) return std::nullopt;

    const std::size_t begin = config_.window_cap && t > *config_.window_cap ? t - *config_.window_cap : 0;
    const auto point =
        window_statistic(buffer_, begin, t, config_, config_.warm_start ? &warm_params_ : nullptr);
    if (!point) return std::nullopt;

    trace_.push_back(*point);
    if (point->statistic > config_.threshold) {
        alarm_ = Alarm{t, point->tau_hat, point->statistic};
        warm_params_.clear();
    }
    return alarm_;
}

DetectionResult Detector::result() const {
    DetectionResult r;
    r.trace = trace_;
    if (alarm_) {
        r.stopping_time = alarm_->t;
        r.tau_hat = alarm_->tau_hat;
        r.statistic = alarm_->statistic;
    }
    return r;
}

DetectionResult run(const ObservationBuffer& stream, const DetectorConfig& config) {
    Detector detector(config, stream.dim());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (detector.step(stream[i])) break;
    }
    return detector.result();
}

DetectionResult run(std::span<const double> scalar_stream, const DetectorConfig& config) {
    return run(ObservationBuffer::from_scalars(scalar_stream), config);
}

}  // namespace ccpd
