#include <catch2/catch_amalgamated.hpp>

#include "macrocast/gam.hpp"
#include "support/test_util.hpp"

using namespace macrocast;
using Catch::Approx;

TEST_CASE("the cubic basis is a partition of unity on the training range") {
    const BsplineBasis basis(-2.0, 5.0, 10);
    std::vector<double> row(10);
    Rng rng(3);
    for (int i = 0; i <= 200; ++i) {
        const double x = -2.0 + 7.0 * static_cast<double>(i) / 200.0;
        basis.eval_row(x, row);
        double sum = 0.0;
        for (double v : row) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == Approx(1.0).margin(1e-12));
        // derivative of a constant expansion is zero
        basis.eval_deriv_row(x, row);
        double dsum = 0.0;
        for (double v : row) dsum += v;
        CHECK(dsum == Approx(0.0).margin(1e-10));
    }
}

TEST_CASE("basis derivatives match finite differences") {
    const BsplineBasis basis(0.0, 1.0, 10);
    std::vector<double> lo(10), hi(10), d(10);
    for (double x : {0.05, 0.31, 0.5, 0.77, 0.95}) {
        const double h = 1e-6;
        basis.eval_row(x - h, lo);
        basis.eval_row(x + h, hi);
        basis.eval_deriv_row(x, d);
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(d[k] == Approx((hi[k] - lo[k]) / (2 * h)).margin(1e-5));
        }
    }
}

TEST_CASE("a noiseless linear signal is reproduced exactly") {
    // second-order difference penalties leave linear functions unpenalized
    const auto rows = test_util::make_rows(
        120, 41, [](const std::array<double, 6>& x, test_util::Rng&) { return 2.0 * x[0] + 5.0; },
        0.0, 4.0);
    const GamFit fit = fit_gam(rows);
    const GamPredictions pred = predict_gam(fit, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(pred.values[i] == Approx(rows[i].y).margin(1e-6));
        CHECK_FALSE(pred.extrapolated[i]);
    }
}

TEST_CASE("a smooth nonlinear signal is recovered near the noise floor") {
    auto generator = [](const std::array<double, 6>& x, test_util::Rng& rng) {
        return std::sin(2.0 * 3.14159265358979323846 * x[0]) + 0.1 * rng.normal();
    };
    const auto train = test_util::make_rows(300, 55, generator);
    const auto test = test_util::make_rows(150, 56, generator);
    const GamFit fit = fit_gam(train);
    const GamPredictions pred = predict_gam(fit, test);
    double ss = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (pred.extrapolated[i]) continue;  // fringe rows are a different contract
        const double e = pred.values[i] - test[i].y;
        ss += e * e;
        ++used;
    }
    REQUIRE(used > 100);
    CHECK(std::sqrt(ss / static_cast<double>(used)) < 0.15);
}

TEST_CASE("fewer than twelve rows raise MinimumRows") {
    const auto rows8 = test_util::make_rows(
        8, 1, [](const std::array<double, 6>& x, test_util::Rng&) { return x[0]; });
    CHECK_THROWS_AS(fit_gam(rows8), MinimumRows);
    // the rolling 6-1 geometry trains on six rows
    const auto rows6 = test_util::make_rows(
        6, 2, [](const std::array<double, 6>& x, test_util::Rng&) { return x[0]; });
    CHECK_THROWS_AS(fit_gam(rows6), MinimumRows);
}

TEST_CASE("a constant feature makes the system singular") {
    auto rows = test_util::make_rows(
        40, 3, [](const std::array<double, 6>& x, test_util::Rng&) { return x[0]; });
    for (SupervisedRow& r : rows) r.x[4] = 3.0;
    CHECK_THROWS_AS(fit_gam(rows), SingularSystem);
}

TEST_CASE("an intercept-only fit predicts the intercept everywhere") {
    GamFit fit;
    fit.intercept = 7.0;
    for (std::size_t j = 0; j < 6; ++j) {
        FeatureSmooth smooth;
        smooth.basis = BsplineBasis(0.0, 1.0, 10);
        smooth.coefficients.assign(10, 0.0);
        smooth.column_means.assign(10, 0.0);
        fit.smooths.push_back(std::move(smooth));
    }
    const auto rows = test_util::make_rows(
        25, 4, [](const std::array<double, 6>&, test_util::Rng&) { return 0.0; });
    const GamPredictions pred = predict_gam(fit, rows);
    for (double v : pred.values) CHECK(v == Approx(7.0));
}

TEST_CASE("inputs beyond the training range extend the boundary tangent and are flagged") {
    const auto rows = test_util::make_rows(
        100, 62, [](const std::array<double, 6>& x, test_util::Rng&) { return 2.0 * x[0] + 5.0; },
        0.0, 1.0);
    const GamFit fit = fit_gam(rows);
    double hi = rows[0].x[0];
    for (const SupervisedRow& r : rows) hi = std::max(hi, r.x[0]);

    auto probe = [&](double x0) {
        SupervisedRow r{};
        r.x = rows[0].x;  // keep the other coordinates inside their ranges
        r.x[0] = x0;
        const auto p = predict_gam(fit, std::vector<SupervisedRow>{r});
        return std::pair<double, bool>(p.values[0], p.extrapolated[0]);
    };

    const auto [v1, f1] = probe(hi + 0.5);
    const auto [v2, f2] = probe(hi + 1.0);
    const auto [v3, f3] = probe(hi + 1.5);
    CHECK(f1);
    CHECK(f2);
    CHECK(f3);
    // collinear continuation of the boundary piece
    CHECK((v3 - v2) == Approx(v2 - v1).margin(1e-8));
    // for this linear signal the boundary slope is the true slope
    CHECK((v2 - v1) == Approx(2.0 * 0.5).margin(1e-5));
    const auto [inside, flag_inside] = probe(hi);
    CHECK_FALSE(flag_inside);
    CHECK(inside == Approx(2.0 * hi + 5.0).margin(1e-6));
}

TEST_CASE("at the grid-max smoothing the fit collapses to multiple linear regression") {
    const auto rows = test_util::make_rows(
        150, 71, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return 1.0 + 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[2] + 0.2 * rng.normal();
        });
    GamOptions options;
    options.fixed_lambda = 1e6;
    const GamFit fit = fit_gam(rows, options);
    const GamPredictions pred = predict_gam(fit, rows);

    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const SupervisedRow& r : rows) {
        x.emplace_back(r.x.begin(), r.x.end());
        y.push_back(r.y);
    }
    const auto beta = test_util::ols(x, y, true);
    double ss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double mlr = beta[0];
        for (std::size_t j = 0; j < 6; ++j) mlr += beta[j + 1] * x[i][j];
        ss += (pred.values[i] - mlr) * (pred.values[i] - mlr);
    }
    CHECK(std::sqrt(ss / static_cast<double>(rows.size())) < 1e-3);
    // one linear degree of freedom survives per smooth, plus the intercept
    CHECK(fit.edf == Approx(7.0).margin(0.2));
}

TEST_CASE("every fitted smooth is centered over its training inputs") {
    const auto rows = test_util::make_rows(
        130, 83, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return std::cos(x[0] * 4.0) + x[1] * x[1] + 0.1 * rng.normal();
        });
    const GamFit fit = fit_gam(rows);
    for (std::size_t j = 0; j < 6; ++j) {
        double sum = 0.0;
        bool flag = false;
        for (const SupervisedRow& r : rows) {
            sum += evaluate_smooth(fit.smooths[j], r.x[j], flag);
        }
        CHECK(sum / static_cast<double>(rows.size()) == Approx(0.0).margin(1e-9));
    }
    // residuals against the intercept sum to about zero
    const GamPredictions pred = predict_gam(fit, rows);
    double resid = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) resid += rows[i].y - pred.values[i];
    CHECK(resid / static_cast<double>(rows.size()) == Approx(0.0).margin(1e-9));
}

TEST_CASE("the selected smoothing is a coordinate-wise GCV minimum over the grid") {
    const auto rows = test_util::make_rows(
        90, 97, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return std::sin(3.0 * x[0]) - 0.5 * x[3] + 0.15 * rng.normal();
        });
    GamOptions options;
    const GamFit fit = fit_gam(rows, options);
    std::vector<double> selected;
    for (const FeatureSmooth& s : fit.smooths) selected.push_back(s.lambda);

    for (std::size_t j = 0; j < 6; ++j) {
        for (double candidate : options.lambda_grid) {
            std::vector<double> trial = selected;
            trial[j] = candidate;
            const GamFit other = fit_gam_at(rows, trial, options);
            CHECK(fit.gcv <= other.gcv + 1e-9 * std::abs(other.gcv));
        }
    }
}
