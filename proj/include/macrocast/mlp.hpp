#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "macrocast/optim.hpp"
#include "macrocast/rng.hpp"
#include "macrocast/supervised.hpp"

namespace macrocast {

/// Feed-forward regression network: input -> one rectified hidden layer -> one
/// linear output, trained under squared-error loss. The architecture is fixed
/// for a run; only the optimizer changes between the sgd/adam/lbfgs variants.
struct MlpArchitecture {
    std::size_t input_dim = 6;
    std::size_t hidden = 32;

    std::size_t parameter_count() const { return hidden * input_dim + hidden + hidden + 1; }
};

/// Flat parameter layout: [W1 (hidden x input, row-major) | b1 | W2 | b2].
class MlpNetwork {
  public:
    MlpNetwork(MlpArchitecture arch, std::vector<double> params)
        : arch_(arch), params_(std::move(params)) {
        if (params_.size() != arch_.parameter_count()) {
            throw DimensionMismatch("MLP parameter vector has wrong length");
        }
    }

    /// Weights uniform in +/- sqrt(6 / (fan_in + fan_out)) per layer, biases zero.
    static MlpNetwork glorot_init(MlpArchitecture arch, std::uint64_t seed) {
        std::vector<double> p(arch.parameter_count(), 0.0);
        Rng rng(mix_seed(seed, 0x61f7u));
        const double limit1 = std::sqrt(6.0 / static_cast<double>(arch.input_dim + arch.hidden));
        const double limit2 = std::sqrt(6.0 / static_cast<double>(arch.hidden + 1));
        for (std::size_t i = 0; i < arch.hidden * arch.input_dim; ++i) {
            p[i] = rng.uniform(-limit1, limit1);
        }
        const std::size_t w2_off = arch.hidden * arch.input_dim + arch.hidden;
        for (std::size_t i = 0; i < arch.hidden; ++i) p[w2_off + i] = rng.uniform(-limit2, limit2);
        return MlpNetwork(arch, std::move(p));
    }

    const MlpArchitecture& architecture() const { return arch_; }
    const std::vector<double>& parameters() const { return params_; }

    double forward(std::span<const double> x) const {
        if (x.size() != arch_.input_dim) {
            throw DimensionMismatch("MLP expects " + std::to_string(arch_.input_dim) +
                                    " inputs, got " + std::to_string(x.size()));
        }
        return forward_params(params_, x);
    }

    double forward_params(std::span<const double> p, std::span<const double> x) const {
        const std::size_t in = arch_.input_dim, h = arch_.hidden;
        const std::size_t b1 = h * in, w2 = b1 + h, b2 = w2 + h;
        double out = p[b2];
        for (std::size_t u = 0; u < h; ++u) {
            double z = p[b1 + u];
            for (std::size_t j = 0; j < in; ++j) z += p[u * in + j] * x[j];
            if (z > 0.0) out += p[w2 + u] * z;
        }
        return out;
    }

    /// Pre-activation of each hidden unit; used to keep finite-difference
    /// checks away from the rectifier kink.
    std::vector<double> preactivations(std::span<const double> x) const {
        const std::size_t in = arch_.input_dim, h = arch_.hidden;
        std::vector<double> z(h, 0.0);
        for (std::size_t u = 0; u < h; ++u) {
            z[u] = params_[h * in + u];
            for (std::size_t j = 0; j < in; ++j) z[u] += params_[u * in + j] * x[j];
        }
        return z;
    }

  private:
    MlpArchitecture arch_;
    std::vector<double> params_;
};

/// Mean-squared-error objective of an MLP over a set of standardized rows.
/// evaluate_batch averages over the selected rows, so batch gradients are
/// unbiased estimates of the full gradient.
class MlpObjective final : public Objective {
  public:
    MlpObjective(MlpArchitecture arch, std::span<const SupervisedRow> rows)
        : arch_(arch), rows_(rows) {}

    std::size_t dimension() const override { return arch_.parameter_count(); }
    std::size_t sample_count() const override { return rows_.size(); }

    double evaluate(std::span<const double> p, std::span<double> grad) const override {
        return loss_and_grad(p, grad, nullptr);
    }

    double evaluate_batch(std::span<const double> p, std::span<double> grad,
                          std::span<const std::size_t> rows) const override {
        return loss_and_grad(p, grad, &rows);
    }

  private:
    double loss_and_grad(std::span<const double> p, std::span<double> grad,
                         const std::span<const std::size_t>* subset) const {
        const std::size_t in = arch_.input_dim, h = arch_.hidden;
        const std::size_t b1 = h * in, w2 = b1 + h, b2 = w2 + h;
        std::fill(grad.begin(), grad.end(), 0.0);
        const std::size_t count = subset ? subset->size() : rows_.size();
        const double inv = 1.0 / static_cast<double>(count);

        double loss = 0.0;
        std::vector<double> act(h, 0.0);
        for (std::size_t r = 0; r < count; ++r) {
            const SupervisedRow& row = rows_[subset ? (*subset)[r] : r];
            double out = p[b2];
            for (std::size_t u = 0; u < h; ++u) {
                double z = p[b1 + u];
                for (std::size_t j = 0; j < in; ++j) z += p[u * in + j] * row.x[j];
                act[u] = z > 0.0 ? z : 0.0;
                out += p[w2 + u] * act[u];
            }
            const double err = out - row.y;
            loss += err * err * inv;

            const double dout = 2.0 * err * inv;
            grad[b2] += dout;
            for (std::size_t u = 0; u < h; ++u) {
                grad[w2 + u] += dout * act[u];
                if (act[u] > 0.0) {
                    const double dz = dout * p[w2 + u];
                    grad[b1 + u] += dz;
                    for (std::size_t j = 0; j < in; ++j) grad[u * in + j] += dz * row.x[j];
                }
            }
        }
        return loss;
    }

    MlpArchitecture arch_;
    std::span<const SupervisedRow> rows_;
};

enum class OptimizerKind { Sgd, Adam, Lbfgs };

inline std::string_view to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::Sgd: return "sgd";
        case OptimizerKind::Adam: return "adam";
        case OptimizerKind::Lbfgs: return "lbfgs";
    }
    return "unknown";
}

struct MlpTrainConfig {
    MlpArchitecture architecture{};
    SgdConfig sgd{};
    AdamConfig adam{};
    LbfgsConfig lbfgs{};
};

struct FittedMlp {
    MlpNetwork network;
    OptimizerTrace trace;
};

/// Trains on standardized rows (callers z-score features and target per
/// training window and inverse-transform predictions afterwards).
inline FittedMlp fit_mlp(std::span<const SupervisedRow> rows, OptimizerKind kind,
                         std::uint64_t seed, const MlpTrainConfig& config = {}) {
    if (rows.size() < 2) {
        throw TooFewRows("MLP training needs at least 2 rows, got " + std::to_string(rows.size()));
    }
    const MlpArchitecture arch = config.architecture;
    // accumulate in stamp order so training is invariant to caller row order
    std::vector<SupervisedRow> ordered(rows.begin(), rows.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const SupervisedRow& a, const SupervisedRow& b) { return a.stamp < b.stamp; });
    MlpObjective objective(arch, ordered);
    std::vector<double> theta0 = MlpNetwork::glorot_init(arch, seed).parameters();

    OptimizerResult result;
    switch (kind) {
        case OptimizerKind::Sgd:
            result = sgd_minimize(objective, std::move(theta0), config.sgd, mix_seed(seed, 0x5dbu));
            break;
        case OptimizerKind::Adam:
            result = adam_minimize(objective, std::move(theta0), config.adam, mix_seed(seed, 0x5dbu));
            break;
        case OptimizerKind::Lbfgs:
            result = lbfgs_minimize(objective, std::move(theta0), config.lbfgs);
            break;
    }
    if (!detail::all_finite(result.parameters)) {
        throw NonFiniteLoss("MLP training produced non-finite parameters (" +
                            std::string(to_string(result.trace.termination)) + ")");
    }
    return FittedMlp{MlpNetwork(arch, std::move(result.parameters)), std::move(result.trace)};
}

inline std::vector<double> predict_mlp(const MlpNetwork& net, std::span<const SupervisedRow> rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const SupervisedRow& r : rows) out.push_back(net.forward(r.x));
    return out;
}

}  // namespace macrocast
