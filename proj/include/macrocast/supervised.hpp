#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "macrocast/series.hpp"

namespace macrocast {

/// One supervised example: features observed the month before `stamp`,
/// target observed at `stamp`.
struct SupervisedRow {
    MonthStamp stamp;
    std::array<double, 6> x{};
    double y = 0.0;
};

struct SupervisedDataset {
    std::string target_name;
    std::vector<SupervisedRow> rows;
};

/// Pairs the panel's feature vector at month t-1 with the target at month t.
inline SupervisedDataset build_lagged(const Panel& panel, std::string_view target_name) {
    if (panel.length() < 2) {
        throw PanelTooShort("build_lagged needs at least 2 panel months, got " +
                            std::to_string(panel.length()));
    }
    const Series& target = panel.target(target_name);
    SupervisedDataset ds;
    ds.target_name = std::string(target_name);
    ds.rows.reserve(panel.length() - 1);
    for (std::size_t t = 1; t < panel.length(); ++t) {
        SupervisedRow row;
        row.stamp = panel.stamp(t);
        row.x = panel.feature_row(t - 1);
        row.y = target.observations()[t].value;
        ds.rows.push_back(row);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Evaluation schemes and folds
// ---------------------------------------------------------------------------

/// Calendar-bounded single split. train_end must be the month before test_start.
struct FixedSplit {
    MonthStamp train_start;
    MonthStamp train_end;
    MonthStamp test_start;
    MonthStamp test_end;
};

/// Rolling origin: train on `window_months`, test on the next `horizon_months`,
/// advance by the horizon so test windows tile without overlap.
struct Rolling {
    int window_months = 12;
    int horizon_months = 4;
};

/// Fractional split resolved against a dataset's calendar at fold time:
/// floor(train_fraction * n) training rows, the remainder as test rows.
struct FractionSplit {
    double train_fraction = 0.8;
};

using EvaluationScheme = std::variant<FractionSplit, FixedSplit, Rolling>;

/// Accepts "80-20", "rolling:12-4", "rolling:6-1", or "rolling:W-H" generally.
inline EvaluationScheme parse_scheme(std::string_view text) {
    if (text == "80-20") return FractionSplit{0.8};
    constexpr std::string_view prefix = "rolling:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string_view rest = text.substr(prefix.size());
        const std::size_t dash = rest.find('-');
        int w = 0, h = 0;
        if (dash != std::string_view::npos && detail::parse_int(rest.substr(0, dash), w) &&
            detail::parse_int(rest.substr(dash + 1), h) && w >= 1 && h >= 1) {
            return Rolling{w, h};
        }
    }
    throw ConfigInvalid("unknown scheme '" + std::string(text) +
                        "' (expected 80-20 or rolling:W-H)");
}

/// Stable label used in report file names ("80-20", "rolling-12-4").
inline std::string scheme_label(const EvaluationScheme& scheme) {
    if (std::holds_alternative<FractionSplit>(scheme)) return "80-20";
    if (const auto* fixed = std::get_if<FixedSplit>(&scheme)) {
        return to_string(fixed->train_start) + "--" + to_string(fixed->test_end);
    }
    const Rolling& r = std::get<Rolling>(scheme);
    return "rolling-" + std::to_string(r.window_months) + "-" + std::to_string(r.horizon_months);
}

/// Half-open row range [begin, end).
struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

struct Fold {
    std::size_t index = 0;
    RowRange train;
    RowRange test;
};

/// Resolves a fractional split against the dataset calendar.
inline FixedSplit resolve_fraction(const SupervisedDataset& ds, const FractionSplit& f) {
    const std::size_t n = ds.rows.size();
    const auto train_rows = static_cast<std::size_t>(std::floor(f.train_fraction * static_cast<double>(n)));
    if (train_rows < 1 || train_rows >= n) {
        throw DatasetTooShort("fractional split needs both a train and a test row");
    }
    return FixedSplit{ds.rows.front().stamp, ds.rows[train_rows - 1].stamp,
                      ds.rows[train_rows].stamp, ds.rows.back().stamp};
}

inline std::vector<Fold> folds(const SupervisedDataset& ds, const EvaluationScheme& scheme) {
    const std::size_t n = ds.rows.size();
    if (const auto* frac = std::get_if<FractionSplit>(&scheme)) {
        return folds(ds, resolve_fraction(ds, *frac));
    }
    if (const auto* fixed = std::get_if<FixedSplit>(&scheme)) {
        if (successor(fixed->train_end) != fixed->test_start) {
            throw ConfigInvalid("fixed split: train_end + 1 month must equal test_start");
        }
        const MonthStamp first = ds.rows.front().stamp;
        const int a = months_between(first, fixed->train_start);
        const int b = months_between(first, fixed->train_end);
        const int c = months_between(first, fixed->test_start);
        const int d = months_between(first, fixed->test_end);
        if (a < 0 || b < a || d < c || d >= static_cast<int>(n)) {
            throw DatasetTooShort("fixed split boundaries fall outside the dataset");
        }
        Fold fold;
        fold.index = 0;
        fold.train = {static_cast<std::size_t>(a), static_cast<std::size_t>(b) + 1};
        fold.test = {static_cast<std::size_t>(c), static_cast<std::size_t>(d) + 1};
        return {fold};
    }
    const Rolling& r = std::get<Rolling>(scheme);
    const auto w = static_cast<std::size_t>(r.window_months);
    const auto h = static_cast<std::size_t>(r.horizon_months);
    if (n < w + h) {
        throw DatasetTooShort("rolling " + std::to_string(w) + "-" + std::to_string(h) +
                              " needs at least " + std::to_string(w + h) + " rows, got " +
                              std::to_string(n));
    }
    const std::size_t count = (n - w) / h;
    std::vector<Fold> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Fold fold;
        fold.index = k;
        fold.train = {k * h, k * h + w};
        fold.test = {w + k * h, w + k * h + h};
        out.push_back(fold);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-window standardization
// ---------------------------------------------------------------------------

/// Column-wise z-scoring fitted on a fold's training rows only. The target
/// column is included when the downstream model needs scaled responses.
class Standardizer {
  public:
    static Standardizer fit(std::span<const SupervisedRow> rows, bool include_target) {
        if (rows.size() < 2) {
            throw TooFewRows("standardizer needs at least 2 rows, got " +
                             std::to_string(rows.size()));
        }
        Standardizer s;
        s.include_target_ = include_target;
        const auto n = static_cast<double>(rows.size());
        for (std::size_t j = 0; j < 6; ++j) {
            double m = 0.0;
            for (const SupervisedRow& r : rows) m += r.x[j];
            m /= n;
            double ss = 0.0;
            for (const SupervisedRow& r : rows) ss += (r.x[j] - m) * (r.x[j] - m);
            const double sd = std::sqrt(ss / (n - 1.0));
            if (!(sd > 0.0)) {
                throw DegenerateColumn("feature column " + std::string(kFeatureNames[j]) +
                                       " is constant over the training window");
            }
            s.x_mean_[j] = m;
            s.x_sd_[j] = sd;
        }
        if (include_target) {
            double m = 0.0;
            for (const SupervisedRow& r : rows) m += r.y;
            m /= n;
            double ss = 0.0;
            for (const SupervisedRow& r : rows) ss += (r.y - m) * (r.y - m);
            const double sd = std::sqrt(ss / (n - 1.0));
            if (!(sd > 0.0)) {
                throw DegenerateColumn("target column is constant over the training window");
            }
            s.y_mean_ = m;
            s.y_sd_ = sd;
        }
        return s;
    }

    SupervisedRow apply(const SupervisedRow& row) const {
        SupervisedRow out = row;
        for (std::size_t j = 0; j < 6; ++j) out.x[j] = (row.x[j] - x_mean_[j]) / x_sd_[j];
        if (include_target_) out.y = (row.y - y_mean_) / y_sd_;
        return out;
    }

    std::vector<SupervisedRow> apply(std::span<const SupervisedRow> rows) const {
        std::vector<SupervisedRow> out;
        out.reserve(rows.size());
        for (const SupervisedRow& r : rows) out.push_back(apply(r));
        return out;
    }

    SupervisedRow invert(const SupervisedRow& row) const {
        SupervisedRow out = row;
        for (std::size_t j = 0; j < 6; ++j) out.x[j] = row.x[j] * x_sd_[j] + x_mean_[j];
        if (include_target_) out.y = row.y * y_sd_ + y_mean_;
        return out;
    }

    double invert_target(double y_scaled) const { return y_scaled * y_sd_ + y_mean_; }

    double x_mean(std::size_t j) const { return x_mean_[j]; }
    double x_sd(std::size_t j) const { return x_sd_[j]; }
    double y_mean() const { return y_mean_; }
    double y_sd() const { return y_sd_; }

  private:
    Standardizer() = default;

    std::array<double, 6> x_mean_{};
    std::array<double, 6> x_sd_{};
    double y_mean_ = 0.0;
    double y_sd_ = 1.0;
    bool include_target_ = false;
};

inline Standardizer fit_standardizer(std::span<const SupervisedRow> rows, bool include_target) {
    return Standardizer::fit(rows, include_target);
}

}  // namespace macrocast
