#include "ccpd/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string_view>

#include "ccpd/errors.hpp"

namespace ccpd {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<double> parse_record(std::string_view line, std::size_t line_no) {
    std::vector<double> values;
    while (true) {
        const auto comma = line.find(',');
        const auto field = trim(line.substr(0, comma));
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
            throw ParseError(line_no, "cannot parse '" + std::string(field) + "' as a finite number");
        }
        values.push_back(v);
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return values;
}

}  // namespace

void IngestSpec::validate() const {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (normalize && prefix_len < 2) {
        throw std::invalid_argument("normalisation needs a calibration prefix of at least 2 samples");
    }
}

IngestResult ingest(std::istream& in, const IngestSpec& spec) {
    spec.validate();

    std::vector<double> flat;
    std::size_t dim = 0;
    std::size_t record = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const std::size_t index = record++;
        if (index % spec.stride != 0) continue;

        auto fields = parse_record(body, line_no);
        if (!spec.columns.empty()) {
            std::vector<double> picked;
            picked.reserve(spec.columns.size());
            for (std::size_t c : spec.columns) {
                if (c >= fields.size()) {
                    throw ParseError(line_no, "column " + std::to_string(c) + " not present");
                }
                picked.push_back(fields[c]);
            }
            fields = std::move(picked);
        }
        if (dim == 0) {
            dim = fields.size();
        } else if (fields.size() != dim) {
            throw ParseError(line_no, "expected " + std::to_string(dim) + " components, got " +
                                          std::to_string(fields.size()));
        }
        flat.insert(flat.end(), fields.begin(), fields.end());
    }

    IngestResult result{ObservationBuffer(dim == 0 ? (spec.columns.empty() ? 1 : spec.columns.size()) : dim),
                        {}, {}};
    const std::size_t d = result.samples.dim();
    const std::size_t n = flat.size() / d;

    if (spec.prefix_len > 0) {
        if (spec.prefix_len > n) {
            throw InsufficientPrefix("calibration prefix of " + std::to_string(spec.prefix_len) +
                                     " samples exceeds the " + std::to_string(n) + " available");
        }
        if (spec.prefix_len < 2) throw InsufficientPrefix("calibration prefix needs at least 2 samples");
        result.mean.assign(d, 0.0);
        result.std.assign(d, 0.0);
        const double m = static_cast<double>(spec.prefix_len);
        for (std::size_t i = 0; i < spec.prefix_len; ++i) {
            for (std::size_t j = 0; j < d; ++j) result.mean[j] += flat[i * d + j] / m;
        }
        for (std::size_t i = 0; i < spec.prefix_len; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const double dev = flat[i * d + j] - result.mean[j];
                result.std[j] += dev * dev;
            }
        }
        for (double& s : result.std) s = std::sqrt(s / (m - 1.0));
    }

    if (spec.normalize) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!(result.std[j] > 0.0)) {
                throw DegenerateReference("component " + std::to_string(j) +
                                          " has zero standard deviation over the calibration prefix");
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                flat[i * d + j] = (flat[i * d + j] - result.mean[j]) / result.std[j];
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        result.samples.append(std::span<const double>(flat).subspan(i * d, d));
    }
    return result;
}

IngestResult ingest(const IngestSpec& spec) {
    if (spec.path == "-") return ingest(std::cin, spec);
    std::ifstream file(spec.path);
    if (!file) throw std::runtime_error("cannot open input file '" + spec.path + "'");
    return ingest(file, spec);
}

}  // namespace ccpd
