#include "ccpd/report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace ccpd {

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void to_json(nlohmann::json& j, const TracePoint& p) {
    j = nlohmann::json{{"t", p.t}, {"S_t", p.statistic}, {"tau_hat", p.tau_hat}};
}

void from_json(const nlohmann::json& j, TracePoint& p) {
    j.at("t").get_to(p.t);
    j.at("S_t").get_to(p.statistic);
    j.at("tau_hat").get_to(p.tau_hat);
}

void to_json(nlohmann::json& j, const RunReport& r) {
    j = nlohmann::json{
        {"schema_version", r.schema_version},
        {"config", r.config},
        {"threshold", r.threshold},
        {"trace", r.trace},
        {"stopping_time", optional_json(r.stopping_time)},
        {"tau_hat", optional_json(r.tau_hat)},
        {"statistic", optional_json(r.statistic)},
        {"prefix_mean", r.prefix_mean},
        {"prefix_std", r.prefix_std},
        {"wall_time_s", r.wall_time_s},
    };
}

void from_json(const nlohmann::json& j, RunReport& r) {
    j.at("schema_version").get_to(r.schema_version);
    if (r.schema_version != kSchemaVersion) {
        throw std::runtime_error("unsupported report schema_version " + std::to_string(r.schema_version));
    }
    r.config = j.at("config");
    j.at("threshold").get_to(r.threshold);
    j.at("trace").get_to(r.trace);
    r.stopping_time = optional_from<std::size_t>(j, "stopping_time");
    r.tau_hat = optional_from<std::size_t>(j, "tau_hat");
    r.statistic = optional_from<double>(j, "statistic");
    r.prefix_mean = j.value("prefix_mean", std::vector<double>{});
    r.prefix_std = j.value("prefix_std", std::vector<double>{});
    j.at("wall_time_s").get_to(r.wall_time_s);
}

void to_json(nlohmann::json& j, const BenchmarkRow& row) {
    nlohmann::json delays = nlohmann::json::array();
    for (const auto& d : row.rep_delays) delays.push_back(optional_json(d));
    nlohmann::json stops = nlohmann::json::array();
    for (const auto& s : row.stopping_times) stops.push_back(optional_json(s));
    j = nlohmann::json{
        {"scenario", row.scenario},
        {"family", row.family},
        {"threshold", row.threshold},
        {"mean_delay", number_or_null(row.mean_delay)},
        {"std_delay", number_or_null(row.std_delay)},
        {"misses", row.misses},
        {"false_alarms", row.false_alarms},
        {"rep_delays", delays},
        {"stopping_times", stops},
    };
}

RunReport make_report(const DetectionResult& result, double threshold, nlohmann::json config,
                      double wall_time_s) {
    RunReport r;
    r.config = std::move(config);
    r.threshold = threshold;
    r.trace = result.trace;
    r.stopping_time = result.stopping_time;
    r.tau_hat = result.tau_hat;
    r.statistic = result.statistic;
    r.wall_time_s = wall_time_s;
    return r;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
    out << "t,S_t,tau_hat\n";
    out << std::setprecision(17);
    for (const auto& p : trace) out << p.t << ',' << p.statistic << ',' << p.tau_hat << '\n';
}

}  // namespace ccpd
