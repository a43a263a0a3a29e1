#include <catch2/catch_amalgamated.hpp>

#include "macrocast/random_forest.hpp"
#include "support/test_util.hpp"

using namespace macrocast;
using Catch::Approx;

TEST_CASE("a constant target yields a constant forest") {
    const auto rows = test_util::make_rows(
        50, 1, [](const std::array<double, 6>&, test_util::Rng&) { return 4.25; });
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 3;
    const Forest forest = fit_forest(rows, cfg);
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        std::array<double, 6> x{};
        for (double& v : x) v = rng.uniform(-10.0, 10.0);
        CHECK(forest.predict(x) == Approx(4.25));
    }
}

TEST_CASE("one fully grown tree memorizes distinct training rows") {
    const auto rows = test_util::make_rows(
        60, 5, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return 3.0 * x[0] - x[2] + rng.normal();
        });
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.min_node_size = 1;
    cfg.mtry = 6;
    cfg.seed = 11;
    const Forest forest = fit_forest(rows, cfg);
    const auto pred = predict_forest(forest, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(pred[i] == Approx(rows[i].y).margin(1e-12));
    }
}

TEST_CASE("the default forest resolves a step function far below the mean predictor") {
    auto step = [](const std::array<double, 6>& x, test_util::Rng&) {
        return x[0] < 0.5 ? 0.0 : 10.0;
    };
    const auto train = test_util::make_rows(200, 8, step);
    const auto test = test_util::make_rows(400, 9, step);
    ForestConfig cfg;  // defaults: 500 trees, mtry 2, min_node_size 5, bootstrap
    cfg.seed = 13;
    const Forest forest = fit_forest(train, cfg);
    const auto pred = predict_forest(forest, test);

    double forest_ss = 0.0;
    double mean_ss = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        forest_ss += (pred[i] - test[i].y) * (pred[i] - test[i].y);
        mean_ss += (5.0 - test[i].y) * (5.0 - test[i].y);  // balanced classes: mean is 5
    }
    const double forest_rmse = std::sqrt(forest_ss / static_cast<double>(test.size()));
    const double mean_rmse = std::sqrt(mean_ss / static_cast<double>(test.size()));
    CHECK(forest_rmse < 1.0);
    CHECK(mean_rmse == Approx(5.0).margin(0.05));
}

TEST_CASE("forests average their trees") {
    SECTION("identical stumps") {
        const Forest forest({RegressionTree::leaf(4.0), RegressionTree::leaf(4.0),
                             RegressionTree::leaf(4.0)});
        CHECK(forest.predict({1, 2, 3, 4, 5, 6}) == 4.0);
    }
    SECTION("two stumps at 2 and 6") {
        const Forest forest({RegressionTree::leaf(2.0), RegressionTree::leaf(6.0)});
        CHECK(forest.predict({0, 0, 0, 0, 0, 0}) == 4.0);
    }
}

TEST_CASE("predictions never leave the training target range") {
    const auto rows = test_util::make_rows(
        120, 21, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return 100.0 * x[1] + 10.0 * rng.normal();
        });
    double lo = rows[0].y, hi = rows[0].y;
    for (const SupervisedRow& r : rows) {
        lo = std::min(lo, r.y);
        hi = std::max(hi, r.y);
    }
    ForestConfig cfg;
    cfg.n_trees = 50;
    cfg.seed = 5;
    const Forest forest = fit_forest(rows, cfg);
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        std::array<double, 6> x{};
        for (double& v : x) v = rng.uniform(-50.0, 50.0);  // far outside training support
        const double p = forest.predict(x);
        CHECK(p >= lo);
        CHECK(p <= hi);
    }
}

TEST_CASE("fitting is bit-deterministic in (rows, config, seed)") {
    const auto rows = test_util::make_rows(
        80, 31, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return x[0] * x[3] + 0.2 * rng.normal();
        });
    ForestConfig cfg;
    cfg.n_trees = 40;
    cfg.seed = 77;
    const Forest a = fit_forest(rows, cfg);
    const Forest b = fit_forest(rows, cfg);
    const auto pa = predict_forest(a, rows);
    const auto pb = predict_forest(b, rows);
    CHECK(pa == pb);

    cfg.seed = 78;
    const auto pc = predict_forest(fit_forest(rows, cfg), rows);
    CHECK(pa != pc);
}

TEST_CASE("per-tree seeding makes tree identity independent of position") {
    const auto rows = test_util::make_rows(
        50, 41, [](const std::array<double, 6>& x, test_util::Rng&) { return x[0]; });
    ForestConfig small;
    small.n_trees = 5;
    small.seed = 123;
    ForestConfig large = small;
    large.n_trees = 9;
    const Forest a = fit_forest(rows, small);
    const Forest b = fit_forest(rows, large);
    // the first five trees of the larger forest predict exactly like the small one
    std::array<double, 6> x{0.3, 0.1, 0.9, 0.5, 0.2, 0.7};
    for (std::size_t t = 0; t < 5; ++t) {
        CHECK(a.trees()[t].predict(x) == b.trees()[t].predict(x));
    }
}

TEST_CASE("training error improves monotonically as leaves shrink") {
    const auto rows = test_util::make_rows(
        150, 51, [](const std::array<double, 6>& x, test_util::Rng&) { return x[0]; });
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t node_size : {50u, 20u, 5u, 1u}) {
        ForestConfig cfg;
        cfg.n_trees = 1;
        cfg.bootstrap = false;  // deterministic tree: the ensemble is the tree
        cfg.mtry = 6;
        cfg.min_node_size = node_size;
        cfg.seed = 1;
        const Forest forest = fit_forest(rows, cfg);
        const auto pred = predict_forest(forest, rows);
        double ss = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            ss += (pred[i] - rows[i].y) * (pred[i] - rows[i].y);
        }
        const double rmse = std::sqrt(ss / static_cast<double>(rows.size()));
        CHECK(rmse <= previous + 1e-12);
        previous = rmse;
    }
    CHECK(previous == Approx(0.0).margin(1e-12));  // fully grown tree memorizes
}

TEST_CASE("degenerate inputs are rejected") {
    const auto rows = test_util::make_rows(
        1, 61, [](const std::array<double, 6>&, test_util::Rng&) { return 0.0; });
    CHECK_THROWS_AS(fit_forest(rows, {}), TooFewRows);
    const auto more = test_util::make_rows(
        10, 62, [](const std::array<double, 6>&, test_util::Rng&) { return 0.0; });
    ForestConfig bad;
    bad.mtry = 7;
    CHECK_THROWS_AS(fit_forest(more, bad), ConfigInvalid);
    bad.mtry = 2;
    bad.n_trees = 0;
    CHECK_THROWS_AS(fit_forest(more, bad), ConfigInvalid);
}
