#pragma once

// Plain-text signal ingestion: one sample per line, comma-separated
// components, '#' comment lines skipped. Optional down-sampling and z-score
// normalisation against a calibration prefix.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ccpd/buffer.hpp"

namespace ccpd {

struct IngestSpec {
    std::string path = "-";             // "-" reads standard input
    std::vector<std::size_t> columns;   // empty keeps every column
    std::size_t stride = 1;             // keep records 0, stride, 2*stride, ...
    bool normalize = false;
    std::size_t prefix_len = 0;         // kept samples used for mean/std

    void validate() const;
};

struct IngestResult {
    ObservationBuffer samples;
    // Per-component statistics of the prefix (empty when prefix_len == 0).
    std::vector<double> mean;
    std::vector<double> std;
};

// Throws ParseError (with the 1-based line number), InsufficientPrefix or
// DegenerateReference.
IngestResult ingest(std::istream& in, const IngestSpec& spec);
IngestResult ingest(const IngestSpec& spec);

}  // namespace ccpd
