#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macrocast/arimax.hpp"
#include "macrocast/gam.hpp"
#include "macrocast/mlp.hpp"
#include "macrocast/random_forest.hpp"
#include "macrocast/supervised.hpp"

namespace macrocast {

/// Uniform fit/predict contract shared by all model families. `fit` sees only
/// a fold's training rows; `predict` receives the test rows, which for the
/// time-series model must immediately follow the training window.
class Regressor {
  public:
    virtual ~Regressor() = default;
    virtual void fit(std::span<const SupervisedRow> train) = 0;
    virtual std::vector<double> predict(std::span<const SupervisedRow> test) const = 0;
};

enum class ModelKind { Sgd, Adam, Lbfgs, Gam, Arima, Rf };

inline constexpr std::array<ModelKind, 6> kAllModels = {ModelKind::Sgd,  ModelKind::Adam,
                                                        ModelKind::Lbfgs, ModelKind::Gam,
                                                        ModelKind::Arima, ModelKind::Rf};

inline std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Sgd: return "sgd";
        case ModelKind::Adam: return "adam";
        case ModelKind::Lbfgs: return "lbfgs";
        case ModelKind::Gam: return "gam";
        case ModelKind::Arima: return "arima";
        case ModelKind::Rf: return "rf";
    }
    return "unknown";
}

/// Row labels used in rendered tables.
inline std::string_view display_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Sgd: return "SGD";
        case ModelKind::Adam: return "Adam";
        case ModelKind::Lbfgs: return "L-BFGS";
        case ModelKind::Gam: return "GAM";
        case ModelKind::Arima: return "ARIMA";
        case ModelKind::Rf: return "Random Forest";
    }
    return "unknown";
}

inline ModelKind parse_model(std::string_view text) {
    for (ModelKind kind : kAllModels) {
        if (to_string(kind) == text) return kind;
    }
    throw ConfigInvalid("unknown model '" + std::string(text) +
                        "' (expected sgd, adam, lbfgs, gam, arima, or rf)");
}

/// Per-run knobs that deviate from the library defaults.
struct ModelOptions {
    std::optional<ArimaOrder> arima_order;
    MlpTrainConfig mlp{};
    ForestConfig forest{};
    GamOptions gam{};
};

namespace detail {

/// Neural variants: z-score features and target on the training window, fit
/// the network on scaled rows, and map predictions back to original units.
class StandardizedMlpModel final : public Regressor {
  public:
    StandardizedMlpModel(OptimizerKind kind, std::uint64_t seed, MlpTrainConfig config)
        : kind_(kind), seed_(seed), config_(config) {}

    void fit(std::span<const SupervisedRow> train) override {
        scaler_ = Standardizer::fit(train, /*include_target=*/true);
        const std::vector<SupervisedRow> scaled = scaler_->apply(train);
        fitted_ = fit_mlp(scaled, kind_, seed_, config_);
    }

    std::vector<double> predict(std::span<const SupervisedRow> test) const override {
        std::vector<double> out;
        out.reserve(test.size());
        for (const SupervisedRow& row : test) {
            const SupervisedRow scaled = scaler_->apply(row);
            out.push_back(scaler_->invert_target(fitted_->network.forward(scaled.x)));
        }
        return out;
    }

  private:
    OptimizerKind kind_;
    std::uint64_t seed_;
    MlpTrainConfig config_;
    std::optional<Standardizer> scaler_;
    std::optional<FittedMlp> fitted_;
};

class GamModel final : public Regressor {
  public:
    explicit GamModel(GamOptions options) : options_(options) {}

    void fit(std::span<const SupervisedRow> train) override { fitted_ = fit_gam(train, options_); }

    std::vector<double> predict(std::span<const SupervisedRow> test) const override {
        return predict_gam(*fitted_, test).values;
    }

  private:
    GamOptions options_;
    std::optional<GamFit> fitted_;
};

class ArimaModel final : public Regressor {
  public:
    explicit ArimaModel(std::optional<ArimaOrder> order) { options_.order = order; }

    void fit(std::span<const SupervisedRow> train) override { fitted_ = fit_arimax(train, options_); }

    std::vector<double> predict(std::span<const SupervisedRow> test) const override {
        return forecast_arimax(*fitted_, test, test.size());
    }

  private:
    ArimaxOptions options_;
    std::optional<ArimaxFit> fitted_;
};

class ForestModel final : public Regressor {
  public:
    ForestModel(ForestConfig config, std::uint64_t seed) : config_(config) { config_.seed = seed; }

    void fit(std::span<const SupervisedRow> train) override { fitted_.emplace(fit_forest(train, config_)); }

    std::vector<double> predict(std::span<const SupervisedRow> test) const override {
        return predict_forest(*fitted_, test);
    }

  private:
    ForestConfig config_;
    std::optional<Forest> fitted_;
};

}  // namespace detail

/// Builds a fresh model for one (target, model, scheme, fold) task. The seed
/// must already be task-specific.
inline std::unique_ptr<Regressor> make_regressor(ModelKind kind, std::uint64_t seed,
                                                 const ModelOptions& options = {}) {
    switch (kind) {
        case ModelKind::Sgd:
            return std::make_unique<detail::StandardizedMlpModel>(OptimizerKind::Sgd, seed, options.mlp);
        case ModelKind::Adam:
            return std::make_unique<detail::StandardizedMlpModel>(OptimizerKind::Adam, seed, options.mlp);
        case ModelKind::Lbfgs:
            return std::make_unique<detail::StandardizedMlpModel>(OptimizerKind::Lbfgs, seed, options.mlp);
        case ModelKind::Gam:
            return std::make_unique<detail::GamModel>(options.gam);
        case ModelKind::Arima:
            return std::make_unique<detail::ArimaModel>(options.arima_order);
        case ModelKind::Rf:
            return std::make_unique<detail::ForestModel>(options.forest, seed);
    }
    throw ConfigInvalid("unknown model kind");
}

}  // namespace macrocast
