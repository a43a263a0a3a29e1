#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "macrocast/linalg.hpp"
#include "macrocast/supervised.hpp"

namespace macrocast {

/// Cubic B-spline basis with equally spaced knots extended past [lo, hi] so
/// that exactly `size` basis functions form a partition of unity on the
/// training range. Callers handle inputs outside [lo, hi] themselves.
class BsplineBasis {
  public:
    static constexpr int kDegree = 3;

    BsplineBasis() = default;
    BsplineBasis(double lo, double hi, int size)
        : lo_(lo), hi_(hi), size_(size), step_((hi - lo) / static_cast<double>(size - kDegree)) {
        if (!(hi > lo)) throw SingularSystem("spline basis needs a non-degenerate range");
        if (size < kDegree + 1) throw ConfigInvalid("spline basis needs at least 4 functions");
        knots_.resize(static_cast<std::size_t>(size) + kDegree + 1);
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            knots_[i] = lo + (static_cast<double>(i) - kDegree) * step_;
        }
    }

    int size() const { return size_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    /// All basis values at x in [lo, hi]; `out` has length size().
    void eval_row(double x, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        std::array<double, kDegree + 1> values{};
        const int offset = local_values<kDegree>(x, values);
        for (int k = 0; k <= kDegree; ++k) {
            const int idx = offset + k;
            if (idx >= 0 && idx < size_) out[static_cast<std::size_t>(idx)] = values[static_cast<std::size_t>(k)];
        }
    }

    /// First derivative of every basis function at x in [lo, hi].
    void eval_deriv_row(double x, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        // B'_{k,3}(x) = (B_{k,2}(x) - B_{k+1,2}(x)) / step for uniform knots
        std::array<double, kDegree> values{};
        const int offset = local_values<kDegree - 1>(x, values);
        for (int k = 0; k < kDegree; ++k) {
            const int q = offset + k;  // degree-2 function index
            const double v = values[static_cast<std::size_t>(k)] / step_;
            if (q >= 0 && q < size_) out[static_cast<std::size_t>(q)] += v;
            if (q - 1 >= 0 && q - 1 < size_) out[static_cast<std::size_t>(q - 1)] -= v;
        }
    }

  private:
    /// Non-zero degree-P basis values at x and the index of the first one.
    template <int P, std::size_t N>
    int local_values(double x, std::array<double, N>& n_out) const {
        static_assert(N == P + 1);
        int seg = kDegree + static_cast<int>(std::floor((x - lo_) / step_));
        seg = std::clamp(seg, kDegree, size_ - 1);  // x == hi lands in the last segment
        std::array<double, P + 1> left{}, right{};
        n_out[0] = 1.0;
        for (int r = 1; r <= P; ++r) {
            left[static_cast<std::size_t>(r)] = x - knots_[static_cast<std::size_t>(seg + 1 - r)];
            right[static_cast<std::size_t>(r)] = knots_[static_cast<std::size_t>(seg + r)] - x;
            double saved = 0.0;
            for (int k = 0; k < r; ++k) {
                const double temp = n_out[static_cast<std::size_t>(k)] /
                                    (right[static_cast<std::size_t>(k + 1)] + left[static_cast<std::size_t>(r - k)]);
                n_out[static_cast<std::size_t>(k)] = saved + right[static_cast<std::size_t>(k + 1)] * temp;
                saved = left[static_cast<std::size_t>(r - k)] * temp;
            }
            n_out[static_cast<std::size_t>(r)] = saved;
        }
        return seg - P;
    }

    double lo_ = 0.0;
    double hi_ = 1.0;
    int size_ = 0;
    double step_ = 1.0;
    std::vector<double> knots_;
};

/// Second-order difference penalty D2^T D2 for `size` coefficients. Its null
/// space holds coefficient vectors linear in the index, which for uniform
/// B-splines are exactly the affine functions of x.
inline Matrix second_difference_penalty(int size) {
    const auto k = static_cast<std::size_t>(size);
    Matrix p(k, k);
    for (std::size_t i = 0; i + 2 < k; ++i) {
        const double d[3] = {1.0, -2.0, 1.0};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                p(i + static_cast<std::size_t>(a), i + static_cast<std::size_t>(b)) += d[a] * d[b];
            }
        }
    }
    return p;
}

struct FeatureSmooth {
    BsplineBasis basis;
    std::vector<double> coefficients;  // length basis.size()
    std::vector<double> column_means;  // training means of the basis columns
    double lambda = 0.0;
};

struct GamFit {
    double intercept = 0.0;
    std::vector<FeatureSmooth> smooths;  // one per feature
    double gcv = 0.0;
    double edf = 0.0;
};

struct GamOptions {
    int basis_size = 10;
    /// Shared smoothing grid, selected per feature by coordinate-wise greedy GCV.
    std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1,
                                       1e2,  1e3,  1e4,  1e5,  1e6};
    /// Fixes every lambda_j to this value and skips selection (used to pin the
    /// smoother at a grid endpoint).
    std::optional<double> fixed_lambda;
    std::size_t max_sweeps = 10;
};

namespace detail {

/// Orthonormal basis of the subspace of coefficient vectors orthogonal to the
/// all-ones vector (Helmert construction). Removes the one direction that the
/// centered partition-of-unity columns cannot identify.
inline Matrix helmert_complement(int size) {
    const auto k = static_cast<std::size_t>(size);
    Matrix z(k, k - 1);
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const double m = static_cast<double>(j + 1);
        const double norm = std::sqrt(m * (m + 1.0));
        for (std::size_t i = 0; i <= j; ++i) z(i, j) = 1.0 / norm;
        z(j + 1, j) = -m / norm;
    }
    return z;
}

struct GamWorkspace {
    std::size_t n = 0;
    int k = 0;           // basis size
    int kc = 0;          // constrained block width (k - 1)
    double y_mean = 0.0;
    std::vector<double> y_centered;
    std::vector<BsplineBasis> bases;                 // per feature
    std::vector<std::vector<double>> column_means;   // per feature
    Matrix design;                                   // n x (6 * kc), centered + constrained
    Matrix gram;                                     // design^T design
    std::vector<double> rhs;                         // design^T y_centered
    Matrix penalty;                                  // constrained block penalty, kc x kc

    GamWorkspace(std::span<const SupervisedRow> rows, const GamOptions& options) {
        n = rows.size();
        k = options.basis_size;
        kc = k - 1;
        const Matrix z = helmert_complement(k);

        y_mean = 0.0;
        for (const SupervisedRow& r : rows) y_mean += r.y;
        y_mean /= static_cast<double>(n);
        y_centered.resize(n);
        for (std::size_t i = 0; i < n; ++i) y_centered[i] = rows[i].y - y_mean;

        design = Matrix(n, 6 * static_cast<std::size_t>(kc));
        std::vector<double> basis_row(static_cast<std::size_t>(k));
        for (std::size_t j = 0; j < 6; ++j) {
            double lo = rows[0].x[j], hi = rows[0].x[j];
            for (const SupervisedRow& r : rows) {
                lo = std::min(lo, r.x[j]);
                hi = std::max(hi, r.x[j]);
            }
            if (!(hi > lo)) {
                throw SingularSystem("feature column " + std::string(kFeatureNames[j]) +
                                     " is constant; its smooth is not identifiable");
            }
            bases.emplace_back(lo, hi, k);

            Matrix block(n, static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < n; ++i) {
                bases[j].eval_row(rows[i].x[j], basis_row);
                for (int c = 0; c < k; ++c) block(i, static_cast<std::size_t>(c)) = basis_row[static_cast<std::size_t>(c)];
            }
            std::vector<double> means(static_cast<std::size_t>(k), 0.0);
            for (int c = 0; c < k; ++c) {
                for (std::size_t i = 0; i < n; ++i) means[static_cast<std::size_t>(c)] += block(i, static_cast<std::size_t>(c));
                means[static_cast<std::size_t>(c)] /= static_cast<double>(n);
            }
            column_means.push_back(means);
            for (std::size_t i = 0; i < n; ++i) {
                for (int c = 0; c < kc; ++c) {
                    double s = 0.0;
                    for (int r = 0; r < k; ++r) {
                        s += (block(i, static_cast<std::size_t>(r)) - means[static_cast<std::size_t>(r)]) *
                             z(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
                    }
                    design(i, j * static_cast<std::size_t>(kc) + static_cast<std::size_t>(c)) = s;
                }
            }
        }
        gram = design.gram();
        rhs = design.tmatvec(y_centered);

        const Matrix p = second_difference_penalty(k);
        penalty = Matrix(static_cast<std::size_t>(kc), static_cast<std::size_t>(kc));
        for (int a = 0; a < kc; ++a) {
            for (int b = 0; b < kc; ++b) {
                double s = 0.0;
                for (int r = 0; r < k; ++r) {
                    for (int c = 0; c < k; ++c) {
                        s += z(static_cast<std::size_t>(r), static_cast<std::size_t>(a)) *
                             p(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) *
                             z(static_cast<std::size_t>(c), static_cast<std::size_t>(b));
                    }
                }
                penalty(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = s;
            }
        }
    }

    struct Solution {
        std::vector<double> coef;  // constrained coefficients, 6 * kc
        double rss = 0.0;
        double edf = 0.0;
        double gcv = std::numeric_limits<double>::infinity();
    };

    Solution solve(std::span<const double> lambdas) const {
        const std::size_t width = 6 * static_cast<std::size_t>(kc);
        Matrix m(width, width);
        for (std::size_t i = 0; i < width; ++i) {
            for (std::size_t j = 0; j < width; ++j) m(i, j) = gram(i, j);
        }
        for (std::size_t f = 0; f < 6; ++f) {
            const std::size_t off = f * static_cast<std::size_t>(kc);
            for (int a = 0; a < kc; ++a) {
                for (int b = 0; b < kc; ++b) {
                    m(off + static_cast<std::size_t>(a), off + static_cast<std::size_t>(b)) +=
                        lambdas[f] * penalty(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
                }
            }
        }
        const Cholesky chol(m);
        Solution sol;
        sol.coef = chol.solve(rhs);
        const std::vector<double> fitted = design.matvec(sol.coef);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y_centered[i] - fitted[i];
            sol.rss += r * r;
        }
        sol.edf = 1.0 + chol.trace_of_solve(gram);
        const double denom = static_cast<double>(n) - sol.edf;
        if (denom > 1e-9) {
            sol.gcv = static_cast<double>(n) * sol.rss / (denom * denom);
        }
        return sol;
    }
};

}  // namespace detail

/// Fits the additive model at a fixed vector of per-feature smoothing
/// parameters (no selection).
inline GamFit fit_gam_at(std::span<const SupervisedRow> rows, std::span<const double> lambdas,
                         const GamOptions& options = {}) {
    if (rows.size() < 12) {
        throw MinimumRows("GAM needs at least 12 training rows, got " + std::to_string(rows.size()));
    }
    const detail::GamWorkspace ws(rows, options);
    const auto sol = ws.solve(lambdas);

    const Matrix z = detail::helmert_complement(ws.k);
    GamFit fit;
    fit.intercept = ws.y_mean;
    fit.gcv = sol.gcv;
    fit.edf = sol.edf;
    for (std::size_t f = 0; f < 6; ++f) {
        FeatureSmooth smooth;
        smooth.basis = ws.bases[f];
        smooth.column_means = ws.column_means[f];
        smooth.lambda = lambdas[f];
        smooth.coefficients.assign(static_cast<std::size_t>(ws.k), 0.0);
        for (int r = 0; r < ws.k; ++r) {
            double s = 0.0;
            for (int c = 0; c < ws.kc; ++c) {
                s += z(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) *
                     sol.coef[f * static_cast<std::size_t>(ws.kc) + static_cast<std::size_t>(c)];
            }
            smooth.coefficients[static_cast<std::size_t>(r)] = s;
        }
        fit.smooths.push_back(std::move(smooth));
    }
    return fit;
}

/// Penalized additive fit with per-feature smoothing chosen by generalized
/// cross-validation: coordinate-wise greedy sweeps over the shared grid until
/// no coordinate improves, so the chosen grid point is a coordinate-wise
/// minimum of the GCV score.
inline GamFit fit_gam(std::span<const SupervisedRow> rows, const GamOptions& options = {}) {
    if (rows.size() < 12) {
        throw MinimumRows("GAM needs at least 12 training rows, got " + std::to_string(rows.size()));
    }
    if (options.fixed_lambda) {
        std::vector<double> lambdas(6, *options.fixed_lambda);
        return fit_gam_at(rows, lambdas, options);
    }
    if (options.lambda_grid.empty()) throw ConfigInvalid("GAM lambda grid must not be empty");

    const detail::GamWorkspace ws(rows, options);
    const std::size_t mid = options.lambda_grid.size() / 2;
    std::vector<double> lambdas(6, options.lambda_grid[mid]);
    double best = ws.solve(lambdas).gcv;

    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        bool changed = false;
        for (std::size_t f = 0; f < 6; ++f) {
            double best_lambda = lambdas[f];
            std::vector<double> trial = lambdas;
            for (double candidate : options.lambda_grid) {
                trial[f] = candidate;
                const double score = ws.solve(trial).gcv;
                if (score < best) {
                    best = score;
                    best_lambda = candidate;
                }
            }
            if (best_lambda != lambdas[f]) {
                lambdas[f] = best_lambda;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return fit_gam_at(rows, lambdas, options);
}

struct GamPredictions {
    std::vector<double> values;
    /// Set per row when any feature fell outside its training range and the
    /// boundary polynomial was extended linearly.
    std::vector<bool> extrapolated;
};

/// Evaluates one smooth, extending past the training range along the tangent
/// of the boundary piece.
inline double evaluate_smooth(const FeatureSmooth& smooth, double x, bool& extrapolated) {
    const int k = smooth.basis.size();
    std::vector<double> row(static_cast<std::size_t>(k), 0.0);
    double offset = 0.0;
    for (int c = 0; c < k; ++c) {
        offset += smooth.column_means[static_cast<std::size_t>(c)] * smooth.coefficients[static_cast<std::size_t>(c)];
    }
    auto value_at = [&](double t) {
        smooth.basis.eval_row(t, row);
        double s = 0.0;
        for (int c = 0; c < k; ++c) s += row[static_cast<std::size_t>(c)] * smooth.coefficients[static_cast<std::size_t>(c)];
        return s - offset;
    };
    auto slope_at = [&](double t) {
        smooth.basis.eval_deriv_row(t, row);
        double s = 0.0;
        for (int c = 0; c < k; ++c) s += row[static_cast<std::size_t>(c)] * smooth.coefficients[static_cast<std::size_t>(c)];
        return s;
    };
    if (x < smooth.basis.lo()) {
        extrapolated = true;
        return value_at(smooth.basis.lo()) + slope_at(smooth.basis.lo()) * (x - smooth.basis.lo());
    }
    if (x > smooth.basis.hi()) {
        extrapolated = true;
        return value_at(smooth.basis.hi()) + slope_at(smooth.basis.hi()) * (x - smooth.basis.hi());
    }
    return value_at(x);
}

inline GamPredictions predict_gam(const GamFit& fit, std::span<const SupervisedRow> rows) {
    GamPredictions out;
    out.values.reserve(rows.size());
    out.extrapolated.reserve(rows.size());
    for (const SupervisedRow& r : rows) {
        double y = fit.intercept;
        bool flag = false;
        for (std::size_t j = 0; j < 6; ++j) {
            y += evaluate_smooth(fit.smooths[j], r.x[j], flag);
        }
        out.values.push_back(y);
        out.extrapolated.push_back(flag);
    }
    return out;
}

}  // namespace macrocast
