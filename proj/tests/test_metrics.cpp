#include <catch2/catch_amalgamated.hpp>

#include "macrocast/metrics.hpp"
#include "support/test_util.hpp"

using namespace macrocast;
using Catch::Approx;

namespace {

PredictionSet make_set(const std::vector<double>& observed,
                       const std::vector<std::optional<double>>& predicted) {
    PredictionSet set;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        set.push_back({advance(MonthStamp(2021, 2), static_cast<int>(i)), observed[i], predicted[i]});
    }
    return set;
}

/// Plain direct-summation oracle over evaluated records.
struct Oracle {
    double mae = 0.0, rmse = 0.0, nrmse = 0.0;
};

Oracle oracle_metrics(const PredictionSet& set) {
    double abs_sum = 0.0, sq_sum = 0.0, obs_sum = 0.0;
    std::size_t n = 0;
    for (const PredictionRecord& r : set) {
        if (!r.predicted) continue;
        abs_sum += std::abs(r.observed - *r.predicted);
        sq_sum += (r.observed - *r.predicted) * (r.observed - *r.predicted);
        obs_sum += r.observed;
        ++n;
    }
    Oracle o;
    o.mae = abs_sum / static_cast<double>(n);
    o.rmse = std::sqrt(sq_sum / static_cast<double>(n));
    o.nrmse = o.rmse / (obs_sum / static_cast<double>(n));
    return o;
}

}  // namespace

TEST_CASE("perfect predictions score zero with a degenerate interval") {
    const auto set = make_set({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    const MetricReport m = compute_metrics(set, 2000, 42);
    CHECK(m.mae == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.nrmse == 0.0);
    CHECK(m.mae_ci_low == 0.0);
    CHECK(m.mae_ci_high == 0.0);
    CHECK(m.coverage == 1.0);
}

TEST_CASE("the three-point worked example") {
    const auto set = make_set({1.0, 2.0, 3.0}, {2.0, 2.0, 5.0});
    const MetricReport m = compute_metrics(set, 0, 0);
    CHECK(m.mae == Approx(1.0));
    CHECK(m.rmse == Approx(std::sqrt(5.0 / 3.0)));
    CHECK(m.rmse == Approx(1.2910).margin(1e-4));
    CHECK(m.nrmse == Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(m.nrmse == Approx(0.6455).margin(1e-4));
}

TEST_CASE("fuzzed sets match the direct-summation oracle and respect MAE <= RMSE") {
    Rng rng(2718);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + rng.below(50);
        std::vector<double> observed(n);
        std::vector<std::optional<double>> predicted(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            observed[i] = rng.uniform(0.5, 100.0);
            if (rng.below(5) == 0 && !(i + 1 == n && !any)) {
                predicted[i] = std::nullopt;
            } else {
                predicted[i] = observed[i] + rng.normal() * 5.0;
                any = true;
            }
        }
        if (!any) predicted[0] = observed[0];
        const auto set = make_set(observed, predicted);
        const MetricReport m = compute_metrics(set, 0, 0);
        const Oracle o = oracle_metrics(set);
        CHECK(m.mae == Approx(o.mae).epsilon(1e-12));
        CHECK(m.rmse == Approx(o.rmse).epsilon(1e-12));
        CHECK(m.nrmse == Approx(o.nrmse).epsilon(1e-12));
        CHECK(m.mae <= m.rmse + 1e-15);
    }
}

TEST_CASE("metrics and intervals are exactly invariant under record reordering") {
    Rng rng(555);
    std::vector<double> observed;
    std::vector<std::optional<double>> predicted;
    for (int i = 0; i < 40; ++i) {
        observed.push_back(rng.uniform(1.0, 50.0));
        predicted.emplace_back(observed.back() + rng.normal());
    }
    auto set = make_set(observed, predicted);
    const MetricReport before = compute_metrics(set, 500, 7);
    Rng shuffler(1);
    shuffler.shuffle(set);
    const MetricReport after = compute_metrics(set, 500, 7);
    CHECK(before.mae == after.mae);
    CHECK(before.rmse == after.rmse);
    CHECK(before.nrmse == after.nrmse);
    CHECK(before.mae_ci_low == after.mae_ci_low);
    CHECK(before.mae_ci_high == after.mae_ci_high);
}

TEST_CASE("shifting observed and predicted together only moves the N-RMSE denominator") {
    Rng rng(77);
    std::vector<double> observed;
    std::vector<std::optional<double>> predicted;
    for (int i = 0; i < 25; ++i) {
        observed.push_back(rng.uniform(10.0, 20.0));
        predicted.emplace_back(observed.back() + rng.normal());
    }
    const auto base = make_set(observed, predicted);
    const MetricReport m0 = compute_metrics(base, 0, 0);

    const double shift = 1000.0;
    std::vector<double> obs2 = observed;
    std::vector<std::optional<double>> pred2 = predicted;
    for (double& o : obs2) o += shift;
    for (auto& p : pred2) p = *p + shift;
    const MetricReport m1 = compute_metrics(make_set(obs2, pred2), 0, 0);
    CHECK(m1.mae == Approx(m0.mae).epsilon(1e-12));
    CHECK(m1.rmse == Approx(m0.rmse).epsilon(1e-12));
    CHECK(m1.nrmse < m0.nrmse);  // larger denominator
}

TEST_CASE("the bootstrap interval brackets the point MAE on fixed seeds") {
    Rng rng(31337);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 42ULL, 2026ULL}) {
        std::vector<double> observed;
        std::vector<std::optional<double>> predicted;
        for (int i = 0; i < 30; ++i) {
            observed.push_back(rng.uniform(5.0, 500.0));
            predicted.emplace_back(observed.back() + 20.0 * rng.normal());
        }
        const MetricReport m = compute_metrics(make_set(observed, predicted), 2000, seed);
        CHECK(m.mae_ci_low <= m.mae);
        CHECK(m.mae <= m.mae_ci_high);
        CHECK(m.mae_ci_low < m.mae_ci_high);
    }
}

TEST_CASE("missing records are excluded from statistics but counted in coverage") {
    const auto set = make_set({10.0, 20.0, 30.0, 40.0},
                              {std::nullopt, 22.0, std::nullopt, 44.0});
    const MetricReport m = compute_metrics(set, 0, 0);
    CHECK(m.n_evaluated == 2);
    CHECK(m.n_total == 4);
    CHECK(m.coverage == Approx(0.5));
    CHECK(m.mae == Approx(3.0));  // errors 2 and 4
}

TEST_CASE("degenerate prediction sets raise typed errors") {
    CHECK_THROWS_AS(compute_metrics(make_set({1.0, 2.0}, {std::nullopt, std::nullopt}), 0, 0),
                    NoPredictions);
    CHECK_THROWS_AS(compute_metrics(PredictionSet{}, 0, 0), NoPredictions);
    // sign-changing series such as a trade balance have no meaningful N-RMSE
    CHECK_THROWS_AS(compute_metrics(make_set({-5.0, 5.0}, {0.0, 0.0}), 0, 0),
                    NonPositiveTestMean);
}

TEST_CASE("a published RMSE/N-RMSE pair implies the test-period mean scale") {
    // rmse 809.41 against a ~21300 mean gives nrmse near 0.038
    std::vector<double> observed(49, 21300.0);
    std::vector<std::optional<double>> predicted;
    for (int i = 0; i < 49; ++i) {
        predicted.emplace_back(21300.0 + (i % 2 == 0 ? 809.41 : -809.41));
    }
    const MetricReport m = compute_metrics(make_set(observed, predicted), 0, 0);
    CHECK(m.rmse == Approx(809.41).margin(1e-9));
    CHECK(m.nrmse == Approx(0.038).margin(0.0005));
}
