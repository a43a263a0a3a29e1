#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "macrocast/errors.hpp"
#include "macrocast/month.hpp"
#include "macrocast/rng.hpp"

namespace macrocast {

/// One test-month record. `predicted` is empty when the model could not
/// produce a forecast for that month (short training window and the like).
struct PredictionRecord {
    MonthStamp stamp;
    double observed = 0.0;
    std::optional<double> predicted;
};

using PredictionSet = std::vector<PredictionRecord>;

struct MetricReport {
    double mae = 0.0;
    double mae_ci_low = 0.0;
    double mae_ci_high = 0.0;
    double rmse = 0.0;
    double nrmse = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_total = 0;
    double coverage = 0.0;
};

namespace detail {

/// Linearly interpolated empirical quantile over a sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace detail

/// MAE, RMSE, and mean-normalized RMSE over the evaluated (non-missing)
/// records, plus a seeded percentile-bootstrap confidence interval for MAE.
/// Record order is irrelevant. Set bootstrap_b to 0 to collapse the interval
/// onto the point estimate.
inline MetricReport compute_metrics(std::span<const PredictionRecord> predictions,
                                    std::size_t bootstrap_b, std::uint64_t seed) {
    std::vector<double> abs_errors;
    std::vector<double> observed;
    for (const PredictionRecord& r : predictions) {
        if (!r.predicted) continue;
        abs_errors.push_back(std::abs(r.observed - *r.predicted));
        observed.push_back(r.observed);
    }
    const std::size_t n = abs_errors.size();
    if (n == 0) throw NoPredictions("no evaluated predictions in the set");

    // summation over sorted values makes every statistic (and the seeded
    // bootstrap below) exactly invariant to record order
    std::sort(abs_errors.begin(), abs_errors.end());
    std::sort(observed.begin(), observed.end());

    MetricReport report;
    report.n_evaluated = n;
    report.n_total = predictions.size();
    report.coverage = static_cast<double>(n) / static_cast<double>(predictions.size());

    double abs_sum = 0.0, sq_sum = 0.0, obs_sum = 0.0;
    for (double a : abs_errors) {
        abs_sum += a;
        sq_sum += a * a;
    }
    for (double o : observed) obs_sum += o;
    report.mae = abs_sum / static_cast<double>(n);
    report.rmse = std::sqrt(sq_sum / static_cast<double>(n));

    const double test_mean = obs_sum / static_cast<double>(n);
    if (!(test_mean > 0.0)) {
        throw NonPositiveTestMean("normalized RMSE needs a positive test-period mean, got " +
                                  std::to_string(test_mean));
    }
    report.nrmse = report.rmse / test_mean;

    if (bootstrap_b == 0) {
        report.mae_ci_low = report.mae;
        report.mae_ci_high = report.mae;
        return report;
    }
    Rng rng(seed);
    std::vector<double> means;
    means.reserve(bootstrap_b);
    for (std::size_t b = 0; b < bootstrap_b; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += abs_errors[rng.below(n)];
        means.push_back(s / static_cast<double>(n));
    }
    std::sort(means.begin(), means.end());
    report.mae_ci_low = detail::sorted_quantile(means, 0.025);
    report.mae_ci_high = detail::sorted_quantile(means, 0.975);
    return report;
}

}  // namespace macrocast
