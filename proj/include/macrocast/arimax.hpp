#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macrocast/linalg.hpp"
#include "macrocast/optim.hpp"
#include "macrocast/supervised.hpp"

namespace macrocast {

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;

    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

inline std::string to_string(ArimaOrder o) {
    return "(" + std::to_string(o.p) + "," + std::to_string(o.d) + "," + std::to_string(o.q) + ")";
}

struct ArimaxOptions {
    /// Fixed order; empty selects over the grid p,q in 0..2, d in 0..1 by AIC.
    std::optional<ArimaOrder> order;
    /// Intercept defaults to "present iff d == 0" (differencing removes the level).
    std::optional<bool> intercept;
    LbfgsConfig optimizer{.memory = 10,
                          .max_iterations = 500,
                          .grad_tolerance = 1e-9,
                          .c1 = 1e-4,
                          .c2 = 0.9,
                          .max_line_search = 40};
};

/// Fitted ARIMA(p,d,q) with six exogenous coefficients, estimated by
/// conditional sum of squares. Carries the training tail needed to iterate
/// forecasts and to invert the differencing.
struct ArimaxFit {
    ArimaOrder order;
    bool has_intercept = true;
    double intercept = 0.0;
    std::vector<double> ar;          // phi, length p
    std::vector<double> ma;          // psi, length q
    std::array<double, 6> exog{};    // gamma
    double sigma2 = 0.0;
    double css = 0.0;
    std::size_t n_effective = 0;
    double aic = std::numeric_limits<double>::infinity();

    std::vector<double> tail_z;      // last max(p, q) differenced observations
    std::vector<double> tail_resid;  // residuals aligned with tail_z
    double last_level = 0.0;         // final undifferenced observation
    std::array<double, 6> last_exog{};  // exogenous row at the final training month
};

namespace detail {

/// Stationarity of the AR polynomial via the step-down (inverse
/// Levinson-Durbin) recursion: stationary iff every reflection coefficient
/// lies strictly inside (-1, 1).
inline bool ar_is_stationary(std::span<const double> phi) {
    std::vector<double> a(phi.begin(), phi.end());
    for (std::size_t m = a.size(); m > 0; --m) {
        const double k = a[m - 1];
        if (!(std::abs(k) < 1.0 - 1e-10)) return false;
        if (m == 1) break;
        std::vector<double> b(m - 1);
        const double denom = 1.0 - k * k;
        for (std::size_t i = 0; i + 1 < m; ++i) b[i] = (a[i] + k * a[m - 2 - i]) / denom;
        a = std::move(b);
    }
    return true;
}

/// Mean conditional sum of squares of an ARMA(p,q) + exogenous model over a
/// prepared (differenced, standardized) sample, with analytic gradients.
/// Residuals before index p are conditioned to zero.
class CssObjective final : public Objective {
  public:
    CssObjective(std::span<const double> z, const Matrix& x, int p, int q, bool intercept)
        : z_(z), x_(x), p_(p), q_(q), intercept_(intercept) {}

    std::size_t dimension() const override {
        return static_cast<std::size_t>((intercept_ ? 1 : 0) + p_ + q_) + 6;
    }

    double evaluate(std::span<const double> theta, std::span<double> grad) const override {
        const std::size_t n = z_.size();
        const std::size_t dim = dimension();
        const int ic = intercept_ ? 1 : 0;
        const double mu = intercept_ ? theta[0] : 0.0;
        const std::span<const double> phi = theta.subspan(static_cast<std::size_t>(ic), static_cast<std::size_t>(p_));
        const std::span<const double> psi = theta.subspan(static_cast<std::size_t>(ic + p_), static_cast<std::size_t>(q_));
        const std::span<const double> gamma = theta.subspan(static_cast<std::size_t>(ic + p_ + q_), 6);

        resid_.assign(n, 0.0);
        dresid_.assign(n * dim, 0.0);
        std::fill(grad.begin(), grad.end(), 0.0);

        const std::size_t start = static_cast<std::size_t>(p_);
        const double inv = 1.0 / static_cast<double>(n - start);
        double loss = 0.0;
        for (std::size_t t = start; t < n; ++t) {
            double e = z_[t] - mu;
            for (int i = 1; i <= p_; ++i) e -= phi[static_cast<std::size_t>(i - 1)] * z_[t - static_cast<std::size_t>(i)];
            double* dt = &dresid_[t * dim];
            if (intercept_) dt[0] = -1.0;
            for (int i = 1; i <= p_; ++i) dt[ic + i - 1] = -z_[t - static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < 6; ++k) {
                e -= gamma[k] * x_(t, k);
                dt[static_cast<std::size_t>(ic + p_ + q_) + k] = -x_(t, k);
            }
            for (int j = 1; j <= q_; ++j) {
                if (t < start + static_cast<std::size_t>(j)) continue;  // conditioned residuals are zero
                const std::size_t s = t - static_cast<std::size_t>(j);
                const double w = psi[static_cast<std::size_t>(j - 1)];
                e -= w * resid_[s];
                dt[ic + p_ + j - 1] -= resid_[s];
                const double* ds = &dresid_[s * dim];
                for (std::size_t u = 0; u < dim; ++u) dt[u] -= w * ds[u];
            }
            resid_[t] = e;
            loss += e * e * inv;
            for (std::size_t u = 0; u < dim; ++u) grad[u] += 2.0 * e * dt[u] * inv;
        }
        return loss;
    }

    const std::vector<double>& residuals() const { return resid_; }

  private:
    std::span<const double> z_;
    const Matrix& x_;
    int p_;
    int q_;
    bool intercept_;
    mutable std::vector<double> resid_;
    mutable std::vector<double> dresid_;
};

inline std::vector<double> difference(std::span<const double> v, int d) {
    std::vector<double> out(v.begin(), v.end());
    for (int r = 0; r < d; ++r) {
        for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
        out.pop_back();
    }
    return out;
}

}  // namespace detail

inline ArimaxFit fit_arimax(std::span<const SupervisedRow> rows, const ArimaxOptions& options = {});

namespace detail {

inline ArimaxFit fit_arimax_fixed(std::span<const SupervisedRow> rows, ArimaOrder order,
                                  bool intercept, const LbfgsConfig& optimizer) {
    const std::size_t n = rows.size();
    const int p = order.p, d = order.d, q = order.q;
    const std::size_t minimum = static_cast<std::size_t>(12 + p + d + q);
    if (n < minimum) {
        throw TrainingTooShort("ARIMA" + to_string(order) + " needs at least " +
                               std::to_string(minimum) + " training rows, got " + std::to_string(n));
    }

    std::vector<double> y(n);
    std::array<std::vector<double>, 6> xcols;
    for (std::size_t k = 0; k < 6; ++k) xcols[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = rows[i].y;
        for (std::size_t k = 0; k < 6; ++k) xcols[k][i] = rows[i].x[k];
    }
    const std::vector<double> z = difference(y, d);
    std::array<std::vector<double>, 6> xd;
    for (std::size_t k = 0; k < 6; ++k) xd[k] = difference(xcols[k], d);
    const std::size_t nd = z.size();

    // Standardize internally for optimizer conditioning; coefficients are
    // mapped back to original units below, so the reparameterization is exact.
    double z_mean = 0.0;
    for (double v : z) z_mean += v;
    z_mean /= static_cast<double>(nd);
    double z_ss = 0.0;
    for (double v : z) z_ss += (v - z_mean) * (v - z_mean);
    double z_scale = std::sqrt(z_ss / static_cast<double>(nd));
    if (!(z_scale > 0.0)) z_scale = 1.0;

    std::array<double, 6> x_mean{}, x_scale{};
    Matrix xs(nd, 6);
    for (std::size_t k = 0; k < 6; ++k) {
        double m = 0.0;
        for (double v : xd[k]) m += v;
        m /= static_cast<double>(nd);
        double ss = 0.0;
        for (double v : xd[k]) ss += (v - m) * (v - m);
        const double s = std::sqrt(ss / static_cast<double>(nd));
        if (!(s > 0.0)) {
            throw RankDeficientExogenous("exogenous column " + std::string(kFeatureNames[k]) +
                                         " is constant after differencing");
        }
        x_mean[k] = m;
        x_scale[k] = s;
        for (std::size_t i = 0; i < nd; ++i) xs(i, k) = (xd[k][i] - m) / s;
    }
    {
        // full-column-rank requirement on the differenced exogenous matrix
        try {
            Cholesky check(xs.gram());
            (void)check;
        } catch (const SingularSystem&) {
            throw RankDeficientExogenous("exogenous columns are collinear after differencing");
        }
    }
    std::vector<double> zs(nd);
    for (std::size_t i = 0; i < nd; ++i) zs[i] = (z[i] - z_mean) / z_scale;

    const detail::CssObjective objective(zs, xs, p, q, intercept);
    const std::size_t dim = objective.dimension();
    const int ic = intercept ? 1 : 0;

    // Warm start: least squares of z on its lags and the regressors, MA at zero.
    std::vector<double> theta0(dim, 0.0);
    {
        const std::size_t cols = static_cast<std::size_t>(ic + p) + 6;
        const std::size_t start = static_cast<std::size_t>(p);
        Matrix design(nd - start, cols);
        std::vector<double> target(nd - start);
        for (std::size_t t = start; t < nd; ++t) {
            const std::size_t r = t - start;
            std::size_t c = 0;
            if (intercept) design(r, c++) = 1.0;
            for (int i = 1; i <= p; ++i) design(r, c++) = zs[t - static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < 6; ++k) design(r, c++) = xs(t, k);
            target[r] = zs[t];
        }
        Matrix gram = design.gram();
        for (std::size_t i = 0; i < cols; ++i) gram(i, i) += 1e-10;
        try {
            const std::vector<double> beta = Cholesky(gram).solve(design.tmatvec(target));
            for (std::size_t i = 0; i < static_cast<std::size_t>(ic + p); ++i) theta0[i] = beta[i];
            for (std::size_t k = 0; k < 6; ++k) theta0[static_cast<std::size_t>(ic + p + q) + k] = beta[static_cast<std::size_t>(ic + p) + k];
        } catch (const SingularSystem&) {
            // keep the zero start
        }
    }

    OptimizerResult result = lbfgs_minimize(objective, std::move(theta0), optimizer);
    if (result.trace.termination == Termination::NonFiniteLoss) {
        throw NonFiniteLoss("ARIMA" + to_string(order) + " estimation diverged");
    }
    const std::vector<double>& theta = result.parameters;

    std::vector<double> phi(theta.begin() + ic, theta.begin() + ic + p);
    std::vector<double> psi(theta.begin() + ic + p, theta.begin() + ic + p + q);
    if (!detail::ar_is_stationary(phi)) {
        throw NonStationaryFit("ARIMA" + to_string(order) +
                               " autoregressive polynomial has a root inside the unit circle");
    }

    ArimaxFit fit;
    fit.order = order;
    fit.has_intercept = intercept;
    fit.ar = std::move(phi);
    fit.ma = std::move(psi);
    double phi_sum = 0.0;
    for (double v : fit.ar) phi_sum += v;
    double mean_shift = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
        fit.exog[k] = theta[static_cast<std::size_t>(ic + p + q) + k] * z_scale / x_scale[k];
        mean_shift += fit.exog[k] * x_mean[k];
    }
    fit.intercept = intercept
                        ? z_mean * (1.0 - phi_sum) + z_scale * theta[0] - mean_shift
                        : 0.0;

    // Residuals in original units with the final coefficients.
    const std::size_t start = static_cast<std::size_t>(p);
    std::vector<double> resid(nd, 0.0);
    double css = 0.0;
    for (std::size_t t = start; t < nd; ++t) {
        double e = z[t] - fit.intercept;
        for (int i = 1; i <= p; ++i) e -= fit.ar[static_cast<std::size_t>(i - 1)] * z[t - static_cast<std::size_t>(i)];
        for (int j = 1; j <= q; ++j) {
            if (t >= start + static_cast<std::size_t>(j)) e -= fit.ma[static_cast<std::size_t>(j - 1)] * resid[t - static_cast<std::size_t>(j)];
        }
        for (std::size_t k = 0; k < 6; ++k) e -= fit.exog[k] * xd[k][t];
        resid[t] = e;
        css += e * e;
    }
    fit.css = css;
    fit.n_effective = nd - start;
    fit.sigma2 = css / static_cast<double>(fit.n_effective);
    if (!(fit.sigma2 > 0.0)) fit.sigma2 = 1e-300;  // degenerate exact fit
    const double n_eff = static_cast<double>(fit.n_effective);
    const double log_lik = -0.5 * n_eff * (std::log(2.0 * 3.141592653589793238462643383279503) +
                                           std::log(fit.sigma2) + 1.0);
    fit.aic = -2.0 * log_lik + 2.0 * (static_cast<double>(dim) + 1.0);

    const std::size_t m = static_cast<std::size_t>(std::max(p, q));
    for (std::size_t i = nd - std::min(m, nd); i < nd; ++i) {
        fit.tail_z.push_back(z[i]);
        fit.tail_resid.push_back(resid[i]);
    }
    fit.last_level = y.back();
    for (std::size_t k = 0; k < 6; ++k) fit.last_exog[k] = xcols[k].back();
    return fit;
}

}  // namespace detail

/// Estimates ARIMA(p,d,q) with exogenous regressors by conditional sum of
/// squares. With no fixed order, candidates over p,q in {0,1,2} and d in
/// {0,1} compete by AIC; non-stationary or diverging candidates are dropped.
inline ArimaxFit fit_arimax(std::span<const SupervisedRow> rows, const ArimaxOptions& options) {
    if (options.order) {
        const bool intercept = options.intercept.value_or(options.order->d == 0);
        return detail::fit_arimax_fixed(rows, *options.order, intercept, options.optimizer);
    }
    ArimaxFit best;
    bool any_feasible = false;
    bool any_fit = false;
    for (int d = 0; d <= 1; ++d) {
        for (int p = 0; p <= 2; ++p) {
            for (int q = 0; q <= 2; ++q) {
                const ArimaOrder order{p, d, q};
                if (rows.size() < static_cast<std::size_t>(12 + p + d + q)) continue;
                any_feasible = true;
                try {
                    const bool intercept = options.intercept.value_or(d == 0);
                    ArimaxFit candidate =
                        detail::fit_arimax_fixed(rows, order, intercept, options.optimizer);
                    any_fit = true;
                    if (candidate.aic < best.aic) best = std::move(candidate);
                } catch (const NonStationaryFit&) {
                } catch (const NonFiniteLoss&) {
                } catch (const SingularSystem&) {
                }
            }
        }
    }
    if (!any_feasible) {
        throw TrainingTooShort("ARIMA selection needs at least 12 training rows, got " +
                               std::to_string(rows.size()));
    }
    if (!any_fit) throw NonStationaryFit("no ARIMA candidate produced an admissible fit");
    return best;
}

/// Iterated forecasts with future innovations at zero. `future` supplies the
/// observed exogenous rows of the test window; differencing is inverted by
/// accumulating from the stored training tail.
inline std::vector<double> forecast_arimax(const ArimaxFit& fit,
                                           std::span<const SupervisedRow> future,
                                           std::size_t horizon) {
    if (future.size() != horizon) {
        throw HorizonMismatch("forecast horizon " + std::to_string(horizon) + " but " +
                              std::to_string(future.size()) + " exogenous rows supplied");
    }
    const int p = fit.order.p, q = fit.order.q, d = fit.order.d;
    std::vector<double> zz = fit.tail_z;
    std::vector<double> ee = fit.tail_resid;
    const std::size_t m = zz.size();

    std::vector<double> out;
    out.reserve(horizon);
    std::array<double, 6> prev_exog = fit.last_exog;
    double level = fit.last_level;
    for (std::size_t k = 0; k < horizon; ++k) {
        std::array<double, 6> x = future[k].x;
        std::array<double, 6> xrow = x;
        if (d == 1) {
            for (std::size_t j = 0; j < 6; ++j) xrow[j] = x[j] - prev_exog[j];
        }
        prev_exog = x;

        double z = fit.has_intercept ? fit.intercept : 0.0;
        const std::size_t pos = m + k;
        for (int i = 1; i <= p; ++i) {
            z += fit.ar[static_cast<std::size_t>(i - 1)] * zz[pos - static_cast<std::size_t>(i)];
        }
        for (int j = 1; j <= q; ++j) {
            z += fit.ma[static_cast<std::size_t>(j - 1)] * ee[pos - static_cast<std::size_t>(j)];
        }
        for (std::size_t j = 0; j < 6; ++j) z += fit.exog[j] * xrow[j];
        zz.push_back(z);
        ee.push_back(0.0);

        if (d == 0) {
            out.push_back(z);
        } else {
            level += z;
            out.push_back(level);
        }
    }
    return out;
}

}  // namespace macrocast
