#include "ccpd/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ccpd/errors.hpp"

namespace ccpd {

namespace {

constexpr std::size_t kPairwiseBlock = 1024;

// Pairwise summation of term(i) for i in [begin, end).
template <typename Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
    if (end - begin <= kPairwiseBlock) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += term(i);
        return acc;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

}  // namespace

double softplus_half(double x) noexcept {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))) - std::numbers::ln2;
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

SplitView::SplitView(std::span<const double> pre, std::span<const double> post)
    : pre_(pre), post_(post) {
    if (pre_.empty() || post_.empty()) {
        throw std::invalid_argument("SplitView: both segments must be non-empty");
    }
}

SplitView SplitView::at(std::span<const double> outputs, std::size_t tau) {
    if (tau == 0 || tau >= outputs.size()) {
        throw std::invalid_argument("SplitView: tau must lie in [1, t-1], got " + std::to_string(tau) +
                                    " for t=" + std::to_string(outputs.size()));
    }
    return SplitView(outputs.first(tau), outputs.subspan(tau));
}

double contrastive_value(const SplitView& view) {
    const auto pre = view.pre();
    const auto post = view.post();
    const double t = static_cast<double>(view.t());
    const double tau = static_cast<double>(view.tau());

    const double pre_sum =
        pairwise_sum(0, pre.size(), [&](std::size_t i) { return pre[i] - softplus_half(pre[i]); });
    const double post_sum =
        pairwise_sum(0, post.size(), [&](std::size_t i) { return softplus_half(post[i]); });
    return (t - tau) / t * pre_sum - tau / t * post_sum;
}

void contrastive_gradient(const SplitView& view, std::span<double> out) {
    if (out.size() != view.t()) {
        throw DimensionMismatch("contrastive_gradient: output span has wrong length");
    }
    const double t = static_cast<double>(view.t());
    const double tau = static_cast<double>(view.tau());
    const double w_pre = (t - tau) / t;
    const double w_post = tau / t;

    const auto pre = view.pre();
    const auto post = view.post();
    // 1 - sigma(x) = sigma(-x)
    for (std::size_t i = 0; i < pre.size(); ++i) out[i] = w_pre * sigmoid(-pre[i]);
    for (std::size_t i = 0; i < post.size(); ++i) out[pre.size() + i] = -w_post * sigmoid(post[i]);
}

std::vector<double> contrastive_gradient(const SplitView& view) {
    std::vector<double> out(view.t());
    contrastive_gradient(view, out);
    return out;
}

double contrastive_value_and_gradient(const SplitView& view, std::span<double> gradient) {
    if (gradient.size() != view.t()) {
        throw DimensionMismatch("contrastive_value_and_gradient: output span has wrong length");
    }
    const auto pre = view.pre();
    const auto post = view.post();
    const double t = static_cast<double>(view.t());
    const double tau = static_cast<double>(view.tau());
    const double w_pre = (t - tau) / t;
    const double w_post = tau / t;

    // Per-sample terms are staged in `gradient` so the summation order
    // matches contrastive_value exactly; `weight` holds the logistic factor
    // (1 - sigma for pre samples, sigma for post samples).
    thread_local std::vector<double> weight;
    weight.resize(view.t());
    for (std::size_t i = 0; i < pre.size(); ++i) {
        const double x = pre[i];
        const double e = std::exp(-std::abs(x));
        gradient[i] = x - (std::max(x, 0.0) + std::log1p(e) - std::numbers::ln2);
        weight[i] = x >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
    }
    for (std::size_t i = 0; i < post.size(); ++i) {
        const double x = post[i];
        const double e = std::exp(-std::abs(x));
        const std::size_t k = pre.size() + i;
        gradient[k] = std::max(x, 0.0) + std::log1p(e) - std::numbers::ln2;
        weight[k] = x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    }
    const double pre_sum = pairwise_sum(0, pre.size(), [&](std::size_t i) { return gradient[i]; });
    const double post_sum =
        pairwise_sum(pre.size(), view.t(), [&](std::size_t i) { return gradient[i]; });

    for (std::size_t i = 0; i < pre.size(); ++i) gradient[i] = w_pre * weight[i];
    for (std::size_t k = pre.size(); k < view.t(); ++k) gradient[k] = -w_post * weight[k];
    return (t - tau) / t * pre_sum - tau / t * post_sum;
}

StatValue max_statistic(std::span<const SplitScore> values, std::size_t t, std::size_t margin) {
    if (margin == 0) throw std::invalid_argument("max_statistic: margin must be >= 1");
    bool found = false;
    StatValue best{0.0, 0};
    for (const auto& v : values) {
        if (v.tau < margin || v.tau + margin > t) continue;
        if (!found || v.value > best.value || (v.value == best.value && v.tau < best.tau)) {
            best = {v.value, v.tau};
            found = true;
        }
    }
    if (!found) {
        throw EmptyRange("no admissible split in {" + std::to_string(margin) + ", ..., t - " +
                         std::to_string(margin) + "} for t=" + std::to_string(t));
    }
    return best;
}

}  // namespace ccpd
