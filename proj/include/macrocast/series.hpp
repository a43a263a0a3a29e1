#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macrocast/errors.hpp"
#include "macrocast/month.hpp"

namespace macrocast {

inline constexpr std::array<std::string_view, 3> kTargetNames = {"EM.T", "BA.T", "CTS.T"};
inline constexpr std::array<std::string_view, 6> kFeatureNames = {"BA.F",  "IN.F", "CTS.F",
                                                                  "CNS.F", "MN.F", "IT.F"};

struct Observation {
    MonthStamp stamp;
    double value = 0.0;
};

/// Named monthly series. Observations are kept sorted by stamp; gaps are
/// allowed until the series is balanced into a Panel.
class Series {
  public:
    Series() = default;
    Series(std::string name, std::vector<Observation> observations)
        : name_(std::move(name)), obs_(std::move(observations)) {
        for (std::size_t i = 1; i < obs_.size(); ++i) {
            if (!(obs_[i - 1].stamp < obs_[i].stamp)) {
                throw std::invalid_argument("Series: observations must be strictly increasing");
            }
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<Observation>& observations() const { return obs_; }
    std::size_t size() const { return obs_.size(); }
    bool empty() const { return obs_.empty(); }
    MonthStamp start() const { return obs_.front().stamp; }
    MonthStamp end() const { return obs_.back().stamp; }

    /// True when every month in [start, end] is present.
    bool contiguous() const {
        if (obs_.empty()) return true;
        return static_cast<int>(obs_.size()) == months_between(start(), end()) + 1;
    }

    /// Value lookup by month; nullptr when absent.
    const double* find(MonthStamp stamp) const {
        auto it = std::lower_bound(obs_.begin(), obs_.end(), stamp,
                                   [](const Observation& o, MonthStamp s) { return o.stamp < s; });
        if (it == obs_.end() || it->stamp != stamp) return nullptr;
        return &it->value;
    }

  private:
    std::string name_;
    std::vector<Observation> obs_;
};

/// Restriction of `series` to [start, end], endpoints inclusive.
inline Series slice(const Series& series, MonthStamp start, MonthStamp end) {
    if (start > end) throw RangeOutOfBounds("slice: start is after end");
    if (series.empty() || start < series.start() || end > series.end()) {
        throw RangeOutOfBounds("slice: [" + to_string(start) + ", " + to_string(end) +
                               "] is outside series " + series.name());
    }
    std::vector<Observation> kept;
    for (const Observation& o : series.observations()) {
        if (o.stamp >= start && o.stamp <= end) kept.push_back(o);
    }
    return Series(series.name(), std::move(kept));
}

/// Balanced monthly panel: three targets and six features over one shared
/// [start, end] window with no gaps. Immutable after construction.
class Panel {
  public:
    Panel(std::array<Series, 3> targets, std::array<Series, 6> features)
        : targets_(std::move(targets)), features_(std::move(features)) {
        for (std::size_t i = 0; i < 3; ++i) check_one(targets_[i], std::string(kTargetNames[i]));
        for (std::size_t i = 0; i < 6; ++i) check_one(features_[i], std::string(kFeatureNames[i]));
    }

    MonthStamp start() const { return targets_[0].start(); }
    MonthStamp end() const { return targets_[0].end(); }
    std::size_t length() const { return targets_[0].size(); }
    MonthStamp stamp(std::size_t index) const { return advance(start(), static_cast<int>(index)); }

    const Series& target(std::size_t i) const { return targets_.at(i); }
    const Series& feature(std::size_t i) const { return features_.at(i); }

    const Series& target(std::string_view name) const {
        for (std::size_t i = 0; i < kTargetNames.size(); ++i) {
            if (kTargetNames[i] == name) return targets_[i];
        }
        throw ConfigInvalid("unknown target name: " + std::string(name));
    }

    std::array<double, 6> feature_row(std::size_t index) const {
        std::array<double, 6> row{};
        for (std::size_t j = 0; j < 6; ++j) row[j] = features_[j].observations()[index].value;
        return row;
    }

    /// All nine series in canonical order (targets then features).
    std::vector<const Series*> all_series() const {
        std::vector<const Series*> out;
        for (const Series& s : targets_) out.push_back(&s);
        for (const Series& s : features_) out.push_back(&s);
        return out;
    }

  private:
    void check_one(const Series& s, const std::string& expected_name) const {
        if (s.name() != expected_name) {
            throw std::invalid_argument("Panel: series name " + s.name() + " where " +
                                        expected_name + " was expected");
        }
        if (s.empty() || !s.contiguous() || s.start() != targets_[0].start() ||
            s.end() != targets_[0].end()) {
            throw std::invalid_argument("Panel: series " + s.name() +
                                        " does not share the panel window");
        }
    }

    std::array<Series, 3> targets_;
    std::array<Series, 6> features_;
};

struct PeriodDefinition {
    std::string label;
    MonthStamp start;
    MonthStamp end;
};

/// The five socioeconomic periods used for descriptive summaries.
inline std::vector<PeriodDefinition> default_periods() {
    return {
        {"P1", {2008, 6}, {2009, 6}},
        {"P2", {2009, 7}, {2015, 12}},
        {"P3", {2016, 1}, {2020, 2}},
        {"P4", {2020, 3}, {2023, 5}},
        {"P5", {2023, 6}, {2025, 1}},
    };
}

struct PeriodSummary {
    std::string variable;
    std::string period;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double sd = 0.0;
};

namespace detail {

inline double sample_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n-1 divisor); defined as 0 for a single value.
inline double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = sample_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Per-variable descriptive statistics over each period, endpoints inclusive.
/// Rows are ordered variable-major in canonical variable order.
inline std::vector<PeriodSummary> summarize(const Panel& panel,
                                            const std::vector<PeriodDefinition>& periods) {
    for (const PeriodDefinition& p : periods) {
        if (p.end < panel.start() || p.start > panel.end()) {
            throw EmptyPeriod("period " + p.label + " contains no panel months");
        }
    }
    std::vector<PeriodSummary> out;
    for (const Series* s : panel.all_series()) {
        for (const PeriodDefinition& p : periods) {
            std::vector<double> values;
            for (const Observation& o : s->observations()) {
                if (o.stamp >= p.start && o.stamp <= p.end) values.push_back(o.value);
            }
            if (values.empty()) throw EmptyPeriod("period " + p.label + " contains no panel months");
            PeriodSummary row;
            row.variable = s->name();
            row.period = p.label;
            row.min = *std::min_element(values.begin(), values.end());
            row.max = *std::max_element(values.begin(), values.end());
            row.mean = detail::sample_mean(values);
            row.sd = detail::sample_sd(values);
            out.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace macrocast
