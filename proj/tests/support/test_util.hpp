#pragma once

// Shared fixtures and independent oracles for the test suites. The solvers
// here are deliberately separate from the library's own linear algebra so
// they can serve as cross-checks.

#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "macrocast/rng.hpp"
#include "macrocast/series.hpp"
#include "macrocast/supervised.hpp"

namespace test_util {

using macrocast::MonthStamp;
using macrocast::Panel;
using macrocast::Rng;
using macrocast::Series;
using macrocast::SupervisedRow;

// --- independent numeric oracles ---------------------------------------

/// Gaussian elimination with partial pivoting (oracle-grade, O(n^3)).
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-300) throw std::runtime_error("gauss_solve: singular");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i > 0; --i) {
        double s = b[i - 1];
        for (std::size_t c = i; c < n; ++c) s -= a[i - 1][c] * x[c];
        x[i - 1] = s / a[i - 1][i - 1];
    }
    return x;
}

/// Ordinary least squares of y on columns of X (optionally with intercept
/// prepended), via normal equations on the oracle solver.
inline std::vector<double> ols(const std::vector<std::vector<double>>& x_rows,
                               const std::vector<double>& y, bool intercept) {
    const std::size_t n = y.size();
    const std::size_t p = x_rows[0].size() + (intercept ? 1 : 0);
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row;
        if (intercept) row.push_back(1.0);
        row.insert(row.end(), x_rows[i].begin(), x_rows[i].end());
        for (std::size_t a = 0; a < p; ++a) {
            xty[a] += row[a] * y[i];
            for (std::size_t b = 0; b < p; ++b) xtx[a][b] += row[a] * row[b];
        }
    }
    return gauss_solve(xtx, xty);
}

inline double direct_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double direct_sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = direct_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// --- synthetic data -----------------------------------------------------

/// Balanced synthetic panel with positive, trending, noisy series so every
/// model family has signal to chew on. Deterministic in the seed.
inline Panel synthetic_panel(std::size_t months, std::uint64_t seed,
                             MonthStamp start = MonthStamp(2005, 1)) {
    Rng rng(seed);
    auto make = [&](std::string name, double base, double trend, double wobble) {
        std::vector<macrocast::Observation> obs;
        double level = base;
        for (std::size_t t = 0; t < months; ++t) {
            level += trend + wobble * rng.normal();
            const double seasonal = 0.01 * base * std::sin(static_cast<double>(t) * 0.5);
            obs.push_back({macrocast::advance(start, static_cast<int>(t)),
                           std::max(level + seasonal, 1.0)});
        }
        return Series(std::move(name), std::move(obs));
    };
    std::array<Series, 3> targets = {make("EM.T", 16000.0, 25.0, 40.0),
                                     make("BA.T", 14000.0, 55.0, 220.0),
                                     make("CTS.T", 47000.0, 80.0, 600.0)};
    std::array<Series, 6> features = {make("BA.F", 200000.0, 900.0, 4000.0),
                                      make("IN.F", 1050000.0, 3000.0, 9000.0),
                                      make("CTS.F", 1000000.0, 4000.0, 20000.0),
                                      make("CNS.F", 340000.0, 1300.0, 5000.0),
                                      make("MN.F", 405000.0, 700.0, 6000.0),
                                      make("IT.F", 45000.0, 90.0, 2500.0)};
    return Panel(std::move(targets), std::move(features));
}

/// Supervised rows with x drawn uniformly and y produced by a caller-supplied
/// generator.
template <typename F>
std::vector<SupervisedRow> make_rows(std::size_t n, std::uint64_t seed, F&& y_of_x,
                                     double lo = 0.0, double hi = 1.0) {
    Rng rng(seed);
    std::vector<SupervisedRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SupervisedRow row;
        row.stamp = macrocast::advance(MonthStamp(2005, 1), static_cast<int>(i));
        for (double& v : row.x) v = rng.uniform(lo, hi);
        row.y = y_of_x(row.x, rng);
        rows.push_back(row);
    }
    return rows;
}

/// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("macrocast_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test_util
