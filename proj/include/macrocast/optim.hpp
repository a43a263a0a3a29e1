#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "macrocast/errors.hpp"
#include "macrocast/rng.hpp"

namespace macrocast {

/// Differentiable objective over a flat parameter vector. Objectives that
/// support mini-batching expose their row count through sample_count() and
/// implement evaluate_batch(); the default treats the objective as atomic.
class Objective {
  public:
    virtual ~Objective() = default;

    [[nodiscard]] virtual std::size_t dimension() const = 0;

    /// Rows available for mini-batch selection (1 means indivisible).
    [[nodiscard]] virtual std::size_t sample_count() const { return 1; }

    /// Full objective. Writes the gradient into `grad` (length = dimension).
    virtual double evaluate(std::span<const double> params, std::span<double> grad) const = 0;

    /// Objective restricted to a subset of rows; defaults to the full pass.
    virtual double evaluate_batch(std::span<const double> params, std::span<double> grad,
                                  std::span<const std::size_t> rows) const {
        (void)rows;
        return evaluate(params, grad);
    }
};

enum class Termination {
    GradientTolerance,
    MaxIterations,
    NonFiniteLoss,
    LineSearchFailed,
};

inline std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::GradientTolerance: return "gradient-tolerance";
        case Termination::MaxIterations: return "max-iterations";
        case Termination::NonFiniteLoss: return "non-finite-loss";
        case Termination::LineSearchFailed: return "line-search-failed";
    }
    return "unknown";
}

struct TraceEntry {
    std::size_t iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;  // infinity norm
};

struct OptimizerTrace {
    std::vector<TraceEntry> entries;
    Termination termination = Termination::MaxIterations;
};

struct OptimizerResult {
    std::vector<double> parameters;
    OptimizerTrace trace;
};

struct SgdConfig {
    double learning_rate = 0.01;  // eta_0; step k uses eta_0 / (1 + decay * k)
    double decay = 1e-4;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 200;
    double grad_tolerance = 1e-8;  // infinity norm of the full gradient, checked per epoch
};

struct AdamConfig {
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 200;
    double grad_tolerance = 1e-8;
};

struct LbfgsConfig {
    std::size_t memory = 10;
    std::size_t max_iterations = 200;
    double grad_tolerance = 1e-6;
    double c1 = 1e-4;  // sufficient-decrease constant
    double c2 = 0.9;   // curvature constant
    std::size_t max_line_search = 40;
};

namespace detail {

inline double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline void validate_common(double rate, std::size_t batch, std::size_t epochs) {
    if (!(rate > 0.0)) throw ConfigInvalid("optimizer learning rate must be positive");
    if (batch < 1) throw ConfigInvalid("optimizer batch size must be at least 1");
    if (epochs < 1) throw ConfigInvalid("optimizer epoch count must be at least 1");
}

/// Epoch-style driver shared by SGD and Adam: reshuffles rows every epoch,
/// applies `step` per mini-batch, and checks the full gradient between epochs.
template <typename StepFn>
OptimizerResult minibatch_minimize(const Objective& objective, std::vector<double> theta,
                                   std::size_t batch_size, std::size_t max_epochs,
                                   double grad_tolerance, std::uint64_t seed, StepFn step) {
    const std::size_t dim = objective.dimension();
    const std::size_t n = std::max<std::size_t>(objective.sample_count(), 1);
    batch_size = std::min(batch_size, n);

    OptimizerTrace trace;
    trace.termination = Termination::MaxIterations;
    std::vector<double> grad(dim, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);

    std::size_t update = 0;
    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t begin = 0; begin < n; begin += batch_size) {
            const std::size_t end = std::min(begin + batch_size, n);
            const std::span<const std::size_t> rows(order.data() + begin, end - begin);
            const double loss = objective.evaluate_batch(theta, grad, rows);
            if (!std::isfinite(loss) || !all_finite(grad)) {
                trace.termination = Termination::NonFiniteLoss;
                return {std::move(theta), std::move(trace)};
            }
            trace.entries.push_back({update, loss, inf_norm(grad)});
            step(theta, grad, update);
            ++update;
        }
        const double full_loss = objective.evaluate(theta, grad);
        if (!std::isfinite(full_loss) || !all_finite(grad)) {
            trace.termination = Termination::NonFiniteLoss;
            return {std::move(theta), std::move(trace)};
        }
        if (inf_norm(grad) < grad_tolerance) {
            trace.termination = Termination::GradientTolerance;
            return {std::move(theta), std::move(trace)};
        }
    }
    return {std::move(theta), std::move(trace)};
}

}  // namespace detail

/// Mini-batch gradient descent, theta <- theta - eta_k * g with
/// eta_k = eta_0 / (1 + decay * k) counted per update.
inline OptimizerResult sgd_minimize(const Objective& objective, std::vector<double> theta0,
                                    const SgdConfig& config, std::uint64_t seed) {
    detail::validate_common(config.learning_rate, config.batch_size, config.max_epochs);
    if (config.decay < 0.0) throw ConfigInvalid("SGD decay must be non-negative");
    return detail::minibatch_minimize(
        objective, std::move(theta0), config.batch_size, config.max_epochs, config.grad_tolerance,
        seed, [&config](std::vector<double>& theta, std::span<const double> grad, std::size_t k) {
            const double eta = config.learning_rate / (1.0 + config.decay * static_cast<double>(k));
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= eta * grad[i];
        });
}

/// Adam with bias-corrected first and second moments.
inline OptimizerResult adam_minimize(const Objective& objective, std::vector<double> theta0,
                                     const AdamConfig& config, std::uint64_t seed) {
    detail::validate_common(config.alpha, config.batch_size, config.max_epochs);
    if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0)) {
        throw ConfigInvalid("Adam beta parameters must lie in [0, 1)");
    }
    if (!(config.epsilon > 0.0)) throw ConfigInvalid("Adam epsilon must be positive");

    std::vector<double> m(objective.dimension(), 0.0);
    std::vector<double> v(objective.dimension(), 0.0);
    return detail::minibatch_minimize(
        objective, std::move(theta0), config.batch_size, config.max_epochs, config.grad_tolerance,
        seed,
        [&config, &m, &v](std::vector<double>& theta, std::span<const double> grad, std::size_t k) {
            const double t = static_cast<double>(k + 1);
            const double m_corr = 1.0 - std::pow(config.beta1, t);
            const double v_corr = 1.0 - std::pow(config.beta2, t);
            for (std::size_t i = 0; i < theta.size(); ++i) {
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
                const double m_hat = m[i] / m_corr;
                const double v_hat = v[i] / v_corr;
                theta[i] -= config.alpha * m_hat / (std::sqrt(v_hat) + config.epsilon);
            }
        });
}

namespace detail {

struct LinePoint {
    double alpha = 0.0;
    double value = 0.0;
    double slope = 0.0;
};

/// Minimizer of the cubic interpolating two (alpha, value, slope) points,
/// safeguarded to the interior of the bracket; falls back to bisection.
inline double cubic_step(const LinePoint& a, const LinePoint& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    const double mid = 0.5 * (a.alpha + b.alpha);
    if (!(disc >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom == 0.0 || !std::isfinite(denom)) return mid;
    double alpha = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(alpha) || alpha < lo + margin || alpha > hi - margin) return mid;
    return alpha;
}

}  // namespace detail

/// L-BFGS with two-loop recursion over the last `memory` curvature pairs and
/// a strong-Wolfe line search. Deterministic for a deterministic objective.
inline OptimizerResult lbfgs_minimize(const Objective& objective, std::vector<double> theta0,
                                      const LbfgsConfig& config) {
    if (!(config.c1 > 0.0 && config.c1 < config.c2 && config.c2 < 1.0)) {
        throw ConfigInvalid("L-BFGS requires 0 < c1 < c2 < 1");
    }
    if (!(config.grad_tolerance > 0.0)) throw ConfigInvalid("L-BFGS gradient tolerance must be positive");

    const std::size_t dim = objective.dimension();
    std::vector<double> x = std::move(theta0);
    std::vector<double> grad(dim, 0.0);
    std::vector<double> grad_trial(dim, 0.0);
    std::vector<double> x_trial(dim, 0.0);

    OptimizerTrace trace;
    trace.termination = Termination::MaxIterations;

    double f = objective.evaluate(x, grad);
    if (!std::isfinite(f) || !detail::all_finite(grad)) {
        trace.termination = Termination::NonFiniteLoss;
        return {std::move(x), std::move(trace)};
    }

    struct Pair {
        std::vector<double> s, y;
        double rho = 0.0;
    };
    std::deque<Pair> history;
    double gamma = 1.0;  // initial inverse-Hessian scale

    std::vector<double> direction(dim, 0.0);
    std::vector<double> alpha_buf;

    // phi(alpha) = f(x + alpha * d); evaluates value and directional slope.
    auto phi = [&](double alpha, double& value, double& slope) {
        for (std::size_t i = 0; i < dim; ++i) x_trial[i] = x[i] + alpha * direction[i];
        value = objective.evaluate(x_trial, grad_trial);
        if (!std::isfinite(value)) {
            value = std::numeric_limits<double>::infinity();
            slope = std::numeric_limits<double>::infinity();
            return;
        }
        slope = 0.0;
        for (std::size_t i = 0; i < dim; ++i) slope += grad_trial[i] * direction[i];
    };

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        const double gnorm = detail::inf_norm(grad);
        trace.entries.push_back({iter, f, gnorm});
        if (gnorm < config.grad_tolerance) {
            trace.termination = Termination::GradientTolerance;
            return {std::move(x), std::move(trace)};
        }

        // direction = -H * grad via the two-loop recursion
        direction.assign(grad.begin(), grad.end());
        alpha_buf.assign(history.size(), 0.0);
        for (std::size_t i = history.size(); i > 0; --i) {
            const Pair& p = history[i - 1];
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += p.s[k] * direction[k];
            alpha_buf[i - 1] = p.rho * dot;
            for (std::size_t k = 0; k < dim; ++k) direction[k] -= alpha_buf[i - 1] * p.y[k];
        }
        for (double& d : direction) d *= gamma;
        for (std::size_t i = 0; i < history.size(); ++i) {
            const Pair& p = history[i];
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += p.y[k] * direction[k];
            const double beta = p.rho * dot;
            for (std::size_t k = 0; k < dim; ++k) direction[k] += (alpha_buf[i] - beta) * p.s[k];
        }
        for (double& d : direction) d = -d;

        double slope0 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) slope0 += grad[i] * direction[i];
        if (!(slope0 < 0.0)) {
            // curvature model no longer a descent model; restart from steepest descent
            history.clear();
            gamma = 1.0;
            slope0 = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                direction[i] = -grad[i];
                slope0 += grad[i] * direction[i];
            }
            if (!(slope0 < 0.0)) {
                trace.termination = Termination::GradientTolerance;
                return {std::move(x), std::move(trace)};
            }
        }

        // strong-Wolfe line search (bracket then zoom)
        const double f0 = f;
        detail::LinePoint prev{0.0, f0, slope0};
        double alpha = 1.0;
        constexpr double kAlphaMax = 1e20;
        bool accepted = false;
        double f_acc = 0.0;

        auto wolfe_ok = [&](double a, double value, double slope) {
            if (value <= f0 + config.c1 * a * slope0 && std::abs(slope) <= config.c2 * (-slope0)) {
                return true;
            }
            // approximate Wolfe: near the minimum the decrease falls below the
            // rounding floor of f, so test the slope bracket instead
            return value <= f0 + 1e-12 * std::abs(f0) &&
                   (2.0 * config.c1 - 1.0) * slope0 >= slope && slope >= config.c2 * slope0;
        };

        auto zoom = [&](detail::LinePoint lo, detail::LinePoint hi) {
            for (std::size_t j = 0; j < config.max_line_search; ++j) {
                const double a = detail::cubic_step(lo, hi);
                double value = 0.0, slope = 0.0;
                phi(a, value, slope);
                if (wolfe_ok(a, value, slope)) {
                    accepted = true;
                    alpha = a;
                    f_acc = value;
                    return;
                }
                if (value > f0 + config.c1 * a * slope0 || value >= lo.value) {
                    hi = {a, value, slope};
                } else {
                    if (slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                    lo = {a, value, slope};
                }
                if (std::abs(hi.alpha - lo.alpha) < 1e-18) break;
            }
        };

        for (std::size_t j = 0; j < config.max_line_search && !accepted; ++j) {
            double value = 0.0, slope = 0.0;
            phi(alpha, value, slope);
            if (wolfe_ok(alpha, value, slope)) {
                accepted = true;
                f_acc = value;
                break;
            }
            if (value > f0 + config.c1 * alpha * slope0 || (j > 0 && value >= prev.value)) {
                zoom(prev, {alpha, value, slope});
                break;
            }
            if (slope >= 0.0) {
                zoom({alpha, value, slope}, prev);
                break;
            }
            prev = {alpha, value, slope};
            alpha = std::min(2.0 * alpha, kAlphaMax);
        }

        if (!accepted) {
            trace.termination = Termination::LineSearchFailed;
            return {std::move(x), std::move(trace)};
        }

        // accept the step; grad_trial/x_trial hold the accepted point
        for (std::size_t i = 0; i < dim; ++i) x_trial[i] = x[i] + alpha * direction[i];
        if (!detail::all_finite(x_trial) || !detail::all_finite(grad_trial)) {
            trace.termination = Termination::NonFiniteLoss;
            return {std::move(x), std::move(trace)};
        }

        Pair pair;
        pair.s.resize(dim);
        pair.y.resize(dim);
        double sy = 0.0, yy = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            pair.s[i] = x_trial[i] - x[i];
            pair.y[i] = grad_trial[i] - grad[i];
            sy += pair.s[i] * pair.y[i];
            yy += pair.y[i] * pair.y[i];
            ss += pair.s[i] * pair.s[i];
        }
        x.swap(x_trial);
        grad.swap(grad_trial);
        f = f_acc;
        // skip pairs without usable curvature, measured at the pair's own scale
        if (sy > 1e-10 * std::sqrt(ss * yy) && config.memory > 0) {
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (history.size() > config.memory) history.pop_front();
            gamma = sy / yy;
        }
    }
    return {std::move(x), std::move(trace)};
}

/// Central-difference verification of the analytic gradient. Returns the
/// maximum over coordinates of |analytic - numeric| / max(1, |analytic|).
inline double check_gradient(const Objective& objective, std::span<const double> theta,
                             double step) {
    if (!(step > 0.0)) throw ConfigInvalid("check_gradient: step must be positive");
    const std::size_t dim = objective.dimension();
    std::vector<double> analytic(dim, 0.0);
    std::vector<double> scratch(dim, 0.0);
    objective.evaluate(theta, analytic);

    std::vector<double> point(theta.begin(), theta.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double original = point[i];
        point[i] = original + step;
        const double f_plus = objective.evaluate(point, scratch);
        point[i] = original - step;
        const double f_minus = objective.evaluate(point, scratch);
        point[i] = original;
        const double numeric = (f_plus - f_minus) / (2.0 * step);
        const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace macrocast
