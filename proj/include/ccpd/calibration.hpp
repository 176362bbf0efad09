#pragma once

// Bootstrap threshold selection: simulate null streams from a Gaussian
// reference, take the maximum statistic of each, and use an upper order
// statistic of those maxima as the alarm threshold.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccpd/discriminator.hpp"

namespace ccpd {

struct CalibrationConfig {
    double reference_mean = 0.0;
    double reference_std = 1.0;
    std::size_t n = 150;
    std::size_t reps = 10;
    // 1 = largest maximum, 2 = second largest, ...
    std::size_t rank = 2;
    DiscriminatorSpec spec;
    std::size_t warmup = 20;
    std::size_t margin = 10;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

// `rank`-th largest of `values` (rank 1 = maximum).
double upper_order_statistic(std::span<const double> values, std::size_t rank);

// Maximum statistic of each null replication, indexed by rep.
std::vector<double> null_maxima(const CalibrationConfig& config);

// upper_order_statistic(null_maxima(config), config.rank).
// Throws DegenerateReference when reference_std <= 0.
double calibrate(const CalibrationConfig& config);

// Null reference stream for replication `rep`.
std::vector<double> reference_stream(const CalibrationConfig& config, std::size_t rep);

}  // namespace ccpd
