#include <catch2/catch_amalgamated.hpp>

#include "macrocast/mlp.hpp"
#include "support/test_util.hpp"

using namespace macrocast;
using Catch::Approx;

namespace {

std::vector<SupervisedRow> standardized(std::vector<SupervisedRow> rows) {
    const Standardizer s = Standardizer::fit(rows, true);
    return s.apply(rows);
}

double train_rmse(const MlpNetwork& net, std::span<const SupervisedRow> rows) {
    double ss = 0.0;
    for (const SupervisedRow& r : rows) {
        const double e = net.forward(r.x) - r.y;
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(rows.size()));
}

}  // namespace

TEST_CASE("an all-zero network predicts zero everywhere") {
    const MlpArchitecture arch{};
    const MlpNetwork net(arch, std::vector<double>(arch.parameter_count(), 0.0));
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        std::array<double, 6> x{};
        for (double& v : x) v = rng.uniform(-3.0, 3.0);
        CHECK(net.forward(x) == 0.0);
    }
}

TEST_CASE("hand-set single-hidden-unit network follows the rectifier") {
    const MlpArchitecture arch{.input_dim = 6, .hidden = 1};
    // w1 = ones, b1 = -1, w2 = 1, b2 = 0
    std::vector<double> params(arch.parameter_count(), 0.0);
    for (std::size_t j = 0; j < 6; ++j) params[j] = 1.0;
    params[6] = -1.0;  // b1
    params[7] = 1.0;   // w2
    const MlpNetwork net(arch, params);

    std::array<double, 6> x{};
    x.fill(1.0 / 6.0);  // pre-activation exactly 0
    CHECK(net.forward(x) == Approx(0.0).margin(1e-15));
    x.fill(0.5);  // pre-activation 3 - 1 = 2
    CHECK(net.forward(x) == Approx(2.0));
    x.fill(-1.0);  // pre-activation -7, rectified away
    CHECK(net.forward(x) == 0.0);
}

TEST_CASE("prediction rejects wrong input dimension") {
    const MlpArchitecture arch{};
    const MlpNetwork net(arch, std::vector<double>(arch.parameter_count(), 0.0));
    const std::vector<double> bad(5, 0.0);
    CHECK_THROWS_AS(net.forward(bad), DimensionMismatch);
    CHECK_THROWS_AS(MlpNetwork(arch, std::vector<double>(10, 0.0)), DimensionMismatch);
}

TEST_CASE("batch prediction equals row-by-row prediction") {
    const auto rows = standardized(test_util::make_rows(
        30, 9, [](const std::array<double, 6>& x, test_util::Rng&) { return x[0] + x[3]; }));
    const MlpNetwork net = MlpNetwork::glorot_init({}, 17);
    const auto batch = predict_mlp(net, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(batch[i] == net.forward(rows[i].x));
    }
}

TEST_CASE("a null standardized target trains to near-zero error") {
    // y values equal across rows would degenerate the target scaler, so feed
    // rows that are already standardized with y = 0 directly
    auto rows = test_util::make_rows(
        80, 21, [](const std::array<double, 6>&, test_util::Rng&) { return 0.0; }, -1.5, 1.5);
    const FittedMlp fit = fit_mlp(rows, OptimizerKind::Lbfgs, 5);
    CHECK(train_rmse(fit.network, rows) < 0.05);
}

TEST_CASE("L-BFGS learns a noiseless linear map to train RMSE below 0.02") {
    const auto raw = test_util::make_rows(
        200, 33,
        [](const std::array<double, 6>& x, test_util::Rng&) {
            double s = 0.0;
            for (double v : x) s += v;
            return s;
        },
        -1.0, 1.0);
    const auto rows = standardized(raw);
    const FittedMlp fit = fit_mlp(rows, OptimizerKind::Lbfgs, 11);
    CHECK(train_rmse(fit.network, rows) < 0.02);
    // the linear map itself fits exactly, so the oracle floor is zero
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const SupervisedRow& r : rows) {
        x.emplace_back(r.x.begin(), r.x.end());
        y.push_back(r.y);
    }
    const auto beta = test_util::ols(x, y, true);
    double oracle_ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double pred = beta[0];
        for (std::size_t j = 0; j < 6; ++j) pred += beta[j + 1] * x[i][j];
        oracle_ss += (pred - y[i]) * (pred - y[i]);
    }
    CHECK(std::sqrt(oracle_ss / static_cast<double>(y.size())) < 1e-10);
}

TEST_CASE("training is bit-deterministic in (data, seed, optimizer)") {
    const auto rows = standardized(test_util::make_rows(
        60, 3, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return x[1] * x[1] + 0.1 * rng.normal();
        }));
    for (OptimizerKind kind : {OptimizerKind::Sgd, OptimizerKind::Adam, OptimizerKind::Lbfgs}) {
        const FittedMlp a = fit_mlp(rows, kind, 77);
        const FittedMlp b = fit_mlp(rows, kind, 77);
        CHECK(a.network.parameters() == b.network.parameters());
    }
    const FittedMlp c = fit_mlp(rows, OptimizerKind::Sgd, 78);
    CHECK(c.network.parameters() != fit_mlp(rows, OptimizerKind::Sgd, 77).network.parameters());
}

TEST_CASE("analytic backpropagation matches central finite differences away from kinks") {
    Rng rng(50);
    int instances = 0;
    int attempts = 0;
    while (instances < 20 && attempts < 400) {
        ++attempts;
        const auto rows = standardized(test_util::make_rows(
            12, rng.next(), [](const std::array<double, 6>& x, test_util::Rng& r) {
                return x[2] - 0.5 * x[4] + 0.3 * r.normal();
            }));
        const MlpNetwork net = MlpNetwork::glorot_init({}, rng.next());
        bool near_kink = false;
        for (const SupervisedRow& r : rows) {
            for (double z : net.preactivations(r.x)) {
                if (std::abs(z) <= 1e-3) near_kink = true;
            }
        }
        if (near_kink) continue;
        ++instances;
        const MlpObjective obj({}, rows);
        CHECK(check_gradient(obj, net.parameters(), 1e-5) < 1e-5);
    }
    REQUIRE(instances == 20);
}

TEST_CASE("L-BFGS training loss is non-increasing over accepted iterates") {
    const auto rows = standardized(test_util::make_rows(
        100, 13, [](const std::array<double, 6>& x, test_util::Rng& rng) {
            return std::sin(x[0] * 3.0) + 0.05 * rng.normal();
        }));
    const FittedMlp fit = fit_mlp(rows, OptimizerKind::Lbfgs, 4);
    for (std::size_t i = 1; i < fit.trace.entries.size(); ++i) {
        CHECK(fit.trace.entries[i].loss <= fit.trace.entries[i - 1].loss + 1e-12);
    }
}

TEST_CASE("L-BFGS predictions are invariant to training-row order") {
    auto rows = standardized(test_util::make_rows(
        50, 19, [](const std::array<double, 6>& x, test_util::Rng&) { return x[0] - x[5]; }));
    const FittedMlp in_order = fit_mlp(rows, OptimizerKind::Lbfgs, 2);
    std::reverse(rows.begin(), rows.end());
    const FittedMlp reversed = fit_mlp(rows, OptimizerKind::Lbfgs, 2);
    CHECK(in_order.network.parameters() == reversed.network.parameters());
}

TEST_CASE("too few rows are rejected") {
    const std::vector<SupervisedRow> one(1);
    CHECK_THROWS_AS(fit_mlp(one, OptimizerKind::Sgd, 0), TooFewRows);
}
