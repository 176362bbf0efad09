#pragma once

// Contrastive functional over a split of discriminator outputs and the
// max-over-splits statistic built on it.
//
// For outputs f_1..f_t split at tau the functional is
//
//   T = (t - tau)/t * sum_{s <= tau} [f_s - h(f_s)] - tau/t * sum_{s > tau} h(f_s),
//   h(x) = ln((1 + e^x) / 2),
//
// which is the scaled logistic cross-entropy of a discriminator
// D = e^f / (1 + e^f) separating the two segments. T is concave in the
// outputs and equals zero for the zero function.

#include <cstddef>
#include <span>
#include <vector>

namespace ccpd {

// ln((1 + e^x) / 2) without overflow for large |x|.
double softplus_half(double x) noexcept;

// Logistic sigmoid 1 / (1 + e^{-x}), stable for either sign.
double sigmoid(double x) noexcept;

// Discriminator outputs for X_1..X_tau (pre) and X_{tau+1}..X_t (post).
// Both segments must be non-empty.
class SplitView {
public:
    SplitView(std::span<const double> pre, std::span<const double> post);

    // Splits `outputs` after the first `tau` entries.
    static SplitView at(std::span<const double> outputs, std::size_t tau);

    std::span<const double> pre() const noexcept { return pre_; }
    std::span<const double> post() const noexcept { return post_; }
    std::size_t tau() const noexcept { return pre_.size(); }
    std::size_t t() const noexcept { return pre_.size() + post_.size(); }

private:
    std::span<const double> pre_;
    std::span<const double> post_;
};

double contrastive_value(const SplitView& view);

// dT/df_s for every sample, pre segment first. `out` must hold view.t() entries.
void contrastive_gradient(const SplitView& view, std::span<double> out);
std::vector<double> contrastive_gradient(const SplitView& view);

// Value and gradient in one pass; the value is bit-identical to
// contrastive_value(view).
double contrastive_value_and_gradient(const SplitView& view, std::span<double> gradient);

struct SplitScore {
    std::size_t tau;
    double value;
};

struct StatValue {
    double value;
    std::size_t tau;
};

// Maximum of the scores whose tau lies in {margin, ..., t - margin}.
// Ties go to the smallest tau. Throws EmptyRange when no score is admissible.
StatValue max_statistic(std::span<const SplitScore> values, std::size_t t, std::size_t margin);

}  // namespace ccpd
