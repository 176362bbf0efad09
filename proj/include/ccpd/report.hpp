#pragma once

// JSON and CSV serialisation of detector runs and benchmark rows.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccpd/detector.hpp"
#include "ccpd/simbench.hpp"

namespace ccpd {

inline constexpr int kSchemaVersion = 1;

struct RunReport {
    int schema_version = kSchemaVersion;
    nlohmann::json config = nlohmann::json::object();  // echo of the effective settings
    double threshold = 0.0;
    std::vector<TracePoint> trace;
    std::optional<std::size_t> stopping_time;
    std::optional<std::size_t> tau_hat;  // diagnostic split of the alarm
    std::optional<double> statistic;
    // Normalisation statistics of the calibration prefix, when used.
    std::vector<double> prefix_mean;
    std::vector<double> prefix_std;
    double wall_time_s = 0.0;

    bool operator==(const RunReport&) const = default;
};

void to_json(nlohmann::json& j, const TracePoint& p);
void from_json(const nlohmann::json& j, TracePoint& p);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);
void to_json(nlohmann::json& j, const BenchmarkRow& row);

RunReport make_report(const DetectionResult& result, double threshold, nlohmann::json config,
                      double wall_time_s);

// "t,S_t,tau_hat" header followed by one line per trace point.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

}  // namespace ccpd
