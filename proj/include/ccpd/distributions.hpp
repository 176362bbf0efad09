#pragma once

#include <variant>

#include "ccpd/rng.hpp"

namespace ccpd {

struct Gaussian {
    double mean = 0.0;
    double std = 1.0;
};

// Uniform on [lo, hi].
struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};

using Distribution = std::variant<Gaussian, Uniform>;

double pdf(const Distribution& d, double x);
// -inf outside the support.
double log_pdf(const Distribution& d, double x);
double mean(const Distribution& d);
double stddev(const Distribution& d);
double draw(const Distribution& d, CounterRng& rng);
// Throws std::invalid_argument for a non-positive std or an empty interval.
void validate(const Distribution& d);

}  // namespace ccpd
