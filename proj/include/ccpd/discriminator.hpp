#pragma once

// Function families used as discriminators and their fitting by Adam ascent
// on the contrastive functional.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ccpd/buffer.hpp"

namespace ccpd {

// (1, x, x^2, ..., x^degree) for scalar x.
struct Polynomial {
    int degree = 1;
};

// First `num_terms` of (1, sin 2πx, cos 2πx, sin 4πx, cos 4πx, ...) for scalar x.
struct Fourier {
    int num_terms = 2;
};

// Optional feasible set for the linear family:
//   sqrt(w' Σ w) <= weight_radius,  |b| <= bias_radius.
// An empty covariance means Σ = I.
struct LinearConstraint {
    double weight_radius = std::numeric_limits<double>::infinity();
    double bias_radius = std::numeric_limits<double>::infinity();
    std::vector<double> covariance;  // dim x dim, row-major
};

// w'x + b. Parameters are laid out as (w_1, ..., w_d, b).
struct Linear {
    int input_dim = 1;
    std::optional<LinearConstraint> constraint;
};

// Dense ReLU network; widths run from the input to the scalar output.
// Parameters are laid out layer by layer as (W row-major, bias).
struct Mlp {
    std::vector<int> widths{1, 2, 3, 1};
};

using Family = std::variant<Polynomial, Fourier, Linear, Mlp>;

struct AdamSettings {
    int epochs = 50;
    double learning_rate = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct DiscriminatorSpec {
    Family family = Polynomial{1};
    double clamp_bound = 10.0;
    AdamSettings optimizer;

    // Throws std::invalid_argument on a malformed spec.
    void validate() const;
    std::size_t input_dim() const;
    std::size_t num_params() const;
    bool linear_in_params() const { return !std::holds_alternative<Mlp>(family); }
    // Canonical family string, e.g. "poly:1" or "mlp:1,2,3,1".
    std::string label() const;
};

// Parses `poly:<p>`, `fourier:<q>`, `linear[:d]`, `mlp[:w1,w2,...]`.
// Optimizer and clamp settings keep their defaults.
DiscriminatorSpec parse_family(std::string_view text);

struct FittedDiscriminator {
    DiscriminatorSpec spec;
    std::vector<double> params;
    double achieved_value = 0.0;
};

// Basis expansion of a sample; UnsupportedFamily for Mlp.
std::vector<double> features(const DiscriminatorSpec& spec, std::span<const double> x);
inline std::vector<double> features(const DiscriminatorSpec& spec, double x) {
    return features(spec, std::span<const double>(&x, 1));
}

// Unclamped family output for the given parameters.
double evaluate_raw(const DiscriminatorSpec& spec, std::span<const double> params,
                    std::span<const double> x);

// Family output clamped to [-clamp_bound, clamp_bound].
double evaluate(const FittedDiscriminator& f, std::span<const double> x);
inline double evaluate(const FittedDiscriminator& f, double x) {
    return evaluate(f, std::span<const double>(&x, 1));
}

// Zeros for linear-in-parameter families; seeded U(-1/sqrt(fan_in), 1/sqrt(fan_in))
// per layer for Mlp.
std::vector<double> initial_params(const DiscriminatorSpec& spec, std::uint64_t seed);

struct ObjectiveValue {
    double value = 0.0;
    std::vector<double> gradient;  // d value / d params
};

// Contrastive functional of the clamped discriminator on the split
// (pre, post) and its gradient in parameter space. Samples at the clamp
// boundary contribute no gradient.
ObjectiveValue objective(const DiscriminatorSpec& spec, std::span<const double> params,
                         const SampleView& pre, const SampleView& post);

// Runs `optimizer.epochs` full-batch Adam ascent steps from `init` (or
// initial_params(spec, seed)) and returns the best parameters seen.
// Throws NonFiniteObjective if the objective stops being finite.
FittedDiscriminator fit(const DiscriminatorSpec& spec, const SampleView& pre, const SampleView& post,
                        std::uint64_t seed, std::optional<std::span<const double>> init = {});

// Radial projection of w onto {sqrt(w' Σ w) <= weight_radius} and clipping
// of b to [-bias_radius, bias_radius]. `params` is (w_1..w_d, b).
void project_linear_constraints(std::span<double> params, const LinearConstraint& constraint);

}  // namespace ccpd
