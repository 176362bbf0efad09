#include "ccpd/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ccpd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double log_pdf(const Distribution& d, double x) {
    return std::visit(overloaded{
                          [x](const Gaussian& g) {
                              const double z = (x - g.mean) / g.std;
                              return -0.5 * z * z - std::log(g.std) - 0.5 * std::log(2.0 * std::numbers::pi);
                          },
                          [x](const Uniform& u) {
                              if (x < u.lo || x > u.hi) return -std::numeric_limits<double>::infinity();
                              return -std::log(u.hi - u.lo);
                          },
                      },
                      d);
}

double pdf(const Distribution& d, double x) { return std::exp(log_pdf(d, x)); }

double mean(const Distribution& d) {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.mean; },
                          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                      },
                      d);
}

double stddev(const Distribution& d) {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.std; },
                          [](const Uniform& u) { return (u.hi - u.lo) / std::sqrt(12.0); },
                      },
                      d);
}

double draw(const Distribution& d, CounterRng& rng) {
    return std::visit(overloaded{
                          [&](const Gaussian& g) { return rng.normal(g.mean, g.std); },
                          [&](const Uniform& u) { return rng.uniform(u.lo, u.hi); },
                      },
                      d);
}

void validate(const Distribution& d) {
    std::visit(overloaded{
                   [](const Gaussian& g) {
                       if (!(g.std > 0.0) || !std::isfinite(g.std) || !std::isfinite(g.mean)) {
                           throw std::invalid_argument("Gaussian requires finite mean and std > 0");
                       }
                   },
                   [](const Uniform& u) {
                       if (!(u.hi > u.lo) || !std::isfinite(u.lo) || !std::isfinite(u.hi)) {
                           throw std::invalid_argument("Uniform requires finite lo < hi");
                       }
                   },
               },
               d);
}

}  // namespace ccpd
