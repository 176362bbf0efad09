#include "ccpd/discriminator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ccpd/contrast.hpp"
#include "ccpd/errors.hpp"
#include "ccpd/rng.hpp"

namespace ccpd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t mlp_param_count(const std::vector<int>& widths) {
    std::size_t n = 0;
    for (std::size_t l = 1; l < widths.size(); ++l) {
        n += static_cast<std::size_t>(widths[l]) * static_cast<std::size_t>(widths[l - 1] + 1);
    }
    return n;
}

void check_dim(const DiscriminatorSpec& spec, std::size_t dim) {
    if (dim != spec.input_dim()) {
        throw DimensionMismatch("discriminator " + spec.label() + " expects samples of dimension " +
                                std::to_string(spec.input_dim()) + ", got " + std::to_string(dim));
    }
}

void fill_features(const DiscriminatorSpec& spec, std::span<const double> x, std::span<double> out) {
    std::visit(overloaded{
                   [&](const Polynomial& p) {
                       double power = 1.0;
                       for (int k = 0; k <= p.degree; ++k) {
                           out[k] = power;
                           power *= x[0];
                       }
                   },
                   [&](const Fourier& f) {
                       for (int j = 0; j < f.num_terms; ++j) {
                           if (j == 0) {
                               out[j] = 1.0;
                           } else {
                               const double freq = 2.0 * std::numbers::pi * ((j + 1) / 2);
                               out[j] = (j % 2 == 1) ? std::sin(freq * x[0]) : std::cos(freq * x[0]);
                           }
                       }
                   },
                   [&](const Linear& l) {
                       std::copy(x.begin(), x.end(), out.begin());
                       out[l.input_dim] = 1.0;
                   },
                   [&](const Mlp&) {
                       throw UnsupportedFamily("features: Mlp is not linear in its parameters");
                   },
               },
               spec.family);
}

// Forward/backward passes for a dense ReLU network on one sample. Unit
// values live in caller-provided storage so a batch can keep every
// sample's activations between the two passes.
class MlpNet {
public:
    explicit MlpNet(const std::vector<int>& widths) : widths_(widths) {
        for (int w : widths_) units_ += static_cast<std::size_t>(w);
        delta_.resize(units_);
    }

    std::size_t units() const noexcept { return units_; }

    // `act` receives post-activation values of every unit (inputs first);
    // hidden units are ReLU, the output is linear.
    double forward(std::span<const double> params, std::span<const double> x, std::span<double> act) const {
        std::copy(x.begin(), x.end(), act.begin());
        std::size_t p = 0;
        std::size_t in_off = 0;
        std::size_t out_off = static_cast<std::size_t>(widths_[0]);
        const std::size_t layers = widths_.size() - 1;
        for (std::size_t l = 1; l <= layers; ++l) {
            const auto n_in = static_cast<std::size_t>(widths_[l - 1]);
            const auto n_out = static_cast<std::size_t>(widths_[l]);
            const std::size_t bias_off = p + n_out * n_in;
            for (std::size_t o = 0; o < n_out; ++o) {
                double z = params[bias_off + o];
                for (std::size_t i = 0; i < n_in; ++i) z += params[p + o * n_in + i] * act[in_off + i];
                act[out_off + o] = (l == layers) ? z : std::max(z, 0.0);
            }
            p = bias_off + n_out;
            in_off = out_off;
            out_off += n_out;
        }
        return act[in_off];
    }

    // Accumulates upstream * d output / d params into grad, using the
    // activations written by forward() for the same sample.
    void backward(std::span<const double> params, std::span<const double> act, double upstream,
                  std::span<double> grad) {
        const std::size_t layers = widths_.size() - 1;
        std::size_t out_off = units_ - 1;
        delta_[out_off] = upstream;
        std::size_t p_end = params.size();
        for (std::size_t l = layers; l >= 1; --l) {
            const auto n_in = static_cast<std::size_t>(widths_[l - 1]);
            const auto n_out = static_cast<std::size_t>(widths_[l]);
            const std::size_t bias_off = p_end - n_out;
            const std::size_t w_off = bias_off - n_out * n_in;
            const std::size_t in_off = out_off - n_in;
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = delta_[out_off + o];
                grad[bias_off + o] += d;
                for (std::size_t i = 0; i < n_in; ++i) grad[w_off + o * n_in + i] += d * act[in_off + i];
            }
            if (l > 1) {
                // A ReLU unit passes gradient only when its output is positive.
                for (std::size_t i = 0; i < n_in; ++i) {
                    double s = 0.0;
                    for (std::size_t o = 0; o < n_out; ++o) {
                        s += params[w_off + o * n_in + i] * delta_[out_off + o];
                    }
                    delta_[in_off + i] = act[in_off + i] > 0.0 ? s : 0.0;
                }
            }
            p_end = w_off;
            out_off = in_off;
        }
    }

private:
    std::vector<int> widths_;
    std::size_t units_ = 0;
    std::vector<double> delta_;
};

// Objective evaluator bound to one split. Linear-in-parameter families
// precompute their design matrix once.
class SplitObjective {
public:
    SplitObjective(const DiscriminatorSpec& spec, const SampleView& pre, const SampleView& post)
        : spec_(spec), tau_(pre.size()), n_(pre.size() + post.size()), k_(spec.num_params()) {
        if (pre.empty() || post.empty()) {
            throw std::invalid_argument("fit: pre and post samples must be non-empty");
        }
        check_dim(spec, pre.dim());
        check_dim(spec, post.dim());
        if (spec.linear_in_params()) {
            design_.resize(n_ * k_);
            for (std::size_t s = 0; s < n_; ++s) {
                const auto x = s < tau_ ? pre[s] : post[s - tau_];
                fill_features(spec, x, std::span<double>(design_).subspan(s * k_, k_));
            }
        } else {
            dim_ = pre.dim();
            inputs_.reserve(n_ * dim_);
            inputs_.insert(inputs_.end(), pre.data().begin(), pre.data().end());
            inputs_.insert(inputs_.end(), post.data().begin(), post.data().end());
            net_.emplace(std::get<Mlp>(spec.family).widths);
            activations_.resize(n_ * net_->units());
        }
        outputs_.resize(n_);
        upstream_.resize(n_);
        active_.resize(n_);
    }

    double operator()(std::span<const double> params, std::span<double> grad) {
        const double bound = spec_.clamp_bound;
        for (std::size_t s = 0; s < n_; ++s) {
            const double raw = raw_output(params, s);
            active_[s] = std::abs(raw) <= bound;
            outputs_[s] = std::clamp(raw, -bound, bound);
        }
        const auto view = SplitView::at(outputs_, tau_);
        if (grad.empty()) return contrastive_value(view);

        const double value = contrastive_value_and_gradient(view, upstream_);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t s = 0; s < n_; ++s) {
            if (!active_[s]) continue;
            const double g = upstream_[s];
            if (net_) {
                net_->backward(params, activations(s), g, grad);
            } else {
                const double* row = design_.data() + s * k_;
                for (std::size_t j = 0; j < k_; ++j) grad[j] += g * row[j];
            }
        }
        return value;
    }

private:
    std::span<const double> sample(std::size_t s) const {
        return std::span<const double>(inputs_).subspan(s * dim_, dim_);
    }

    std::span<double> activations(std::size_t s) {
        return std::span<double>(activations_).subspan(s * net_->units(), net_->units());
    }

    double raw_output(std::span<const double> params, std::size_t s) {
        if (net_) return net_->forward(params, sample(s), activations(s));
        const double* row = design_.data() + s * k_;
        double acc = 0.0;
        for (std::size_t j = 0; j < k_; ++j) acc += row[j] * params[j];
        return acc;
    }

    const DiscriminatorSpec& spec_;
    std::size_t tau_;
    std::size_t n_;
    std::size_t k_;
    std::size_t dim_ = 1;
    std::vector<double> design_;
    std::vector<double> inputs_;
    std::optional<MlpNet> net_;
    std::vector<double> activations_;
    std::vector<double> outputs_;
    std::vector<double> upstream_;
    std::vector<char> active_;
};

int parse_int(std::string_view s, std::string_view what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("invalid " + std::string(what) + " '" + std::string(s) + "'");
    }
    return value;
}

}  // namespace

void DiscriminatorSpec::validate() const {
    std::visit(overloaded{
                   [](const Polynomial& p) {
                       if (p.degree < 0) throw std::invalid_argument("polynomial degree must be >= 0");
                   },
                   [](const Fourier& f) {
                       if (f.num_terms < 1) throw std::invalid_argument("fourier num_terms must be >= 1");
                   },
                   [](const Linear& l) {
                       if (l.input_dim < 1) throw std::invalid_argument("linear input_dim must be >= 1");
                       if (l.constraint) {
                           const auto& c = *l.constraint;
                           if (!(c.weight_radius > 0.0) || !(c.bias_radius > 0.0)) {
                               throw std::invalid_argument("linear constraint radii must be positive");
                           }
                           const auto d = static_cast<std::size_t>(l.input_dim);
                           if (!c.covariance.empty() && c.covariance.size() != d * d) {
                               throw std::invalid_argument("linear constraint covariance must be dim x dim");
                           }
                       }
                   },
                   [](const Mlp& m) {
                       if (m.widths.size() < 2) throw std::invalid_argument("mlp needs at least two widths");
                       for (int w : m.widths) {
                           if (w < 1) throw std::invalid_argument("mlp widths must be positive");
                       }
                       if (m.widths.back() != 1) throw std::invalid_argument("mlp output width must be 1");
                   },
               },
               family);
    if (!(clamp_bound > 0.0)) throw std::invalid_argument("clamp_bound must be positive");
    if (optimizer.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (!(optimizer.learning_rate >= 0.0) || !std::isfinite(optimizer.learning_rate)) {
        throw std::invalid_argument("learning_rate must be finite and >= 0");
    }
}

std::size_t DiscriminatorSpec::input_dim() const {
    return std::visit(overloaded{
                          [](const Linear& l) { return static_cast<std::size_t>(l.input_dim); },
                          [](const Mlp& m) { return static_cast<std::size_t>(m.widths.front()); },
                          [](const auto&) { return std::size_t{1}; },
                      },
                      family);
}

std::size_t DiscriminatorSpec::num_params() const {
    return std::visit(overloaded{
                          [](const Polynomial& p) { return static_cast<std::size_t>(p.degree + 1); },
                          [](const Fourier& f) { return static_cast<std::size_t>(f.num_terms); },
                          [](const Linear& l) { return static_cast<std::size_t>(l.input_dim + 1); },
                          [](const Mlp& m) { return mlp_param_count(m.widths); },
                      },
                      family);
}

std::string DiscriminatorSpec::label() const {
    return std::visit(overloaded{
                          [](const Polynomial& p) { return "poly:" + std::to_string(p.degree); },
                          [](const Fourier& f) { return "fourier:" + std::to_string(f.num_terms); },
                          [](const Linear& l) { return "linear:" + std::to_string(l.input_dim); },
                          [](const Mlp& m) {
                              std::string s = "mlp:";
                              for (std::size_t i = 0; i < m.widths.size(); ++i) {
                                  if (i) s += ',';
                                  s += std::to_string(m.widths[i]);
                              }
                              return s;
                          },
                      },
                      family);
}

DiscriminatorSpec parse_family(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    DiscriminatorSpec spec;
    if (name == "poly") {
        spec.family = Polynomial{parse_int(arg, "polynomial degree")};
    } else if (name == "fourier") {
        spec.family = Fourier{parse_int(arg, "fourier term count")};
    } else if (name == "linear") {
        spec.family = Linear{arg.empty() ? 1 : parse_int(arg, "linear dimension"), std::nullopt};
    } else if (name == "mlp") {
        Mlp m;
        if (!arg.empty()) {
            m.widths.clear();
            std::string_view rest = arg;
            while (true) {
                const auto comma = rest.find(',');
                m.widths.push_back(parse_int(rest.substr(0, comma), "mlp width"));
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
        }
        spec.family = std::move(m);
    } else {
        throw std::invalid_argument("unknown discriminator family '" + std::string(text) +
                                    "' (expected poly:<p>, fourier:<q>, linear[:d] or mlp[:w1,...])");
    }
    spec.validate();
    return spec;
}

std::vector<double> features(const DiscriminatorSpec& spec, std::span<const double> x) {
    if (!spec.linear_in_params()) {
        throw UnsupportedFamily("features: Mlp is not linear in its parameters");
    }
    check_dim(spec, x.size());
    std::vector<double> out(spec.num_params());
    fill_features(spec, x, out);
    return out;
}

double evaluate_raw(const DiscriminatorSpec& spec, std::span<const double> params,
                    std::span<const double> x) {
    check_dim(spec, x.size());
    if (params.size() != spec.num_params()) {
        throw DimensionMismatch("parameter vector has " + std::to_string(params.size()) +
                                " entries, expected " + std::to_string(spec.num_params()));
    }
    if (const auto* m = std::get_if<Mlp>(&spec.family)) {
        const MlpNet net(m->widths);
        std::vector<double> act(net.units());
        return net.forward(params, x, act);
    }
    const auto phi = features(spec, x);
    return std::inner_product(phi.begin(), phi.end(), params.begin(), 0.0);
}

double evaluate(const FittedDiscriminator& f, std::span<const double> x) {
    const double b = f.spec.clamp_bound;
    return std::clamp(evaluate_raw(f.spec, f.params, x), -b, b);
}

std::vector<double> initial_params(const DiscriminatorSpec& spec, std::uint64_t seed) {
    std::vector<double> params(spec.num_params(), 0.0);
    const auto* m = std::get_if<Mlp>(&spec.family);
    if (m == nullptr) return params;

    CounterRng rng(seed);
    std::size_t p = 0;
    for (std::size_t l = 1; l < m->widths.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(m->widths[l - 1]);
        const auto n = static_cast<std::size_t>(m->widths[l]) * (fan_in + 1);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < n; ++i) params[p++] = rng.uniform(-bound, bound);
    }
    return params;
}

ObjectiveValue objective(const DiscriminatorSpec& spec, std::span<const double> params,
                         const SampleView& pre, const SampleView& post) {
    spec.validate();
    if (params.size() != spec.num_params()) {
        throw DimensionMismatch("objective: parameter vector has wrong length");
    }
    SplitObjective obj(spec, pre, post);
    ObjectiveValue out;
    out.gradient.resize(params.size());
    out.value = obj(params, out.gradient);
    return out;
}

void project_linear_constraints(std::span<double> params, const LinearConstraint& constraint) {
    if (params.empty()) return;
    const std::size_t d = params.size() - 1;
    auto w = params.first(d);

    double sq = 0.0;
    if (constraint.covariance.empty()) {
        for (double v : w) sq += v * v;
    } else {
        if (constraint.covariance.size() != d * d) {
            throw DimensionMismatch("project_linear_constraints: covariance must be dim x dim");
        }
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) sq += w[i] * constraint.covariance[i * d + j] * w[j];
        }
    }
    const double norm = std::sqrt(sq);
    if (norm > constraint.weight_radius) {
        const double scale = constraint.weight_radius / norm;
        for (double& v : w) v *= scale;
    }
    params[d] = std::clamp(params[d], -constraint.bias_radius, constraint.bias_radius);
}

FittedDiscriminator fit(const DiscriminatorSpec& spec, const SampleView& pre, const SampleView& post,
                        std::uint64_t seed, std::optional<std::span<const double>> init) {
    spec.validate();
    SplitObjective obj(spec, pre, post);

    const std::size_t k = spec.num_params();
    std::vector<double> theta;
    if (init) {
        if (init->size() != k) throw DimensionMismatch("fit: initial parameters have wrong length");
        theta.assign(init->begin(), init->end());
    } else {
        theta = initial_params(spec, seed);
    }

    const LinearConstraint* constraint = nullptr;
    if (const auto* lin = std::get_if<Linear>(&spec.family); lin && lin->constraint) {
        constraint = &*lin->constraint;
        project_linear_constraints(theta, *constraint);
    }

    std::vector<double> grad(k);
    double value = obj(theta, grad);
    if (!std::isfinite(value)) throw NonFiniteObjective("fit: initial objective is not finite");

    FittedDiscriminator best{spec, theta, value};

    const AdamSettings& adam = spec.optimizer;
    std::vector<double> m(k, 0.0);
    std::vector<double> v(k, 0.0);
    double beta1_pow = 1.0;
    double beta2_pow = 1.0;
    for (int epoch = 0; epoch < adam.epochs; ++epoch) {
        beta1_pow *= adam.beta1;
        beta2_pow *= adam.beta2;
        for (std::size_t j = 0; j < k; ++j) {
            m[j] = adam.beta1 * m[j] + (1.0 - adam.beta1) * grad[j];
            v[j] = adam.beta2 * v[j] + (1.0 - adam.beta2) * grad[j] * grad[j];
            const double m_hat = m[j] / (1.0 - beta1_pow);
            const double v_hat = v[j] / (1.0 - beta2_pow);
            theta[j] += adam.learning_rate * m_hat / (std::sqrt(v_hat) + adam.epsilon);
        }
        if (constraint) project_linear_constraints(theta, *constraint);

        value = obj(theta, grad);
        if (!std::isfinite(value)) {
            throw NonFiniteObjective("fit: objective became non-finite at epoch " + std::to_string(epoch + 1));
        }
        if (value > best.achieved_value) {
            best.params = theta;
            best.achieved_value = value;
        }
    }
    return best;
}

}  // namespace ccpd
