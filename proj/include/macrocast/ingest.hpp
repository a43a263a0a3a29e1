#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "macrocast/io_util.hpp"
#include "macrocast/series.hpp"

namespace macrocast {

// ---------------------------------------------------------------------------
// Run configuration for ingestion
// ---------------------------------------------------------------------------

struct SeriesSpec {
    enum class Role { Target, Feature };
    Role role = Role::Target;
    std::string name;    // canonical identifier, e.g. "EM.T"
    std::filesystem::path path;
    std::string column;  // value-column header in the CSV
};

/// JSON ingest configuration. Example:
/// {
///   "panel_start": "2005-01",
///   "panel_end":   "2025-02",
///   "series": [
///     {"role": "target",  "name": "EM.T", "path": "data/emt.csv", "column": "CES6562000001"},
///     ... exactly 3 targets and 6 features with the canonical names ...
///   ]
/// }
struct IngestConfig {
    std::vector<SeriesSpec> series;
    MonthStamp panel_start{2005, 1};
    MonthStamp panel_end{2025, 2};

    static IngestConfig from_json(const nlohmann::json& j);
    static IngestConfig from_json_file(const std::filesystem::path& path) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigInvalid("ingest config " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }

    void validate() const;
};

inline IngestConfig IngestConfig::from_json(const nlohmann::json& j) {
    IngestConfig cfg;
    try {
        const auto start = parse_month(j.at("panel_start").get<std::string>());
        const auto end = parse_month(j.at("panel_end").get<std::string>());
        if (!start || !end || *end < *start) {
            throw ConfigInvalid("ingest config: panel_start/panel_end must be YYYY-MM with start <= end");
        }
        cfg.panel_start = *start;
        cfg.panel_end = *end;
        for (const auto& e : j.at("series")) {
            SeriesSpec spec;
            const std::string role = e.at("role").get<std::string>();
            if (role == "target") {
                spec.role = SeriesSpec::Role::Target;
            } else if (role == "feature") {
                spec.role = SeriesSpec::Role::Feature;
            } else {
                throw ConfigInvalid("ingest config: role must be 'target' or 'feature'");
            }
            spec.name = e.at("name").get<std::string>();
            spec.path = e.at("path").get<std::string>();
            spec.column = e.at("column").get<std::string>();
            cfg.series.push_back(std::move(spec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("ingest config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline void IngestConfig::validate() const {
    auto has = [&](SeriesSpec::Role role, std::string_view name) {
        return std::any_of(series.begin(), series.end(), [&](const SeriesSpec& s) {
            return s.role == role && s.name == name;
        });
    };
    if (series.size() != 9) {
        throw ConfigInvalid("ingest config: expected 9 series entries, got " +
                            std::to_string(series.size()));
    }
    for (std::string_view n : kTargetNames) {
        if (!has(SeriesSpec::Role::Target, n)) {
            throw ConfigInvalid("ingest config: missing target entry " + std::string(n));
        }
    }
    for (std::string_view n : kFeatureNames) {
        if (!has(SeriesSpec::Role::Feature, n)) {
            throw ConfigInvalid("ingest config: missing feature entry " + std::string(n));
        }
    }
}

// ---------------------------------------------------------------------------
// FRED-format per-series CSV parsing
// ---------------------------------------------------------------------------

struct ParsedSeries {
    Series series;
    std::vector<MonthStamp> missing;  // months whose value cell was the "." marker
};

/// Parses a FRED monthly export: a header row, ISO dates (first of month) in
/// column 1, and the named value column. "." cells are collected as missing.
inline ParsedSeries parse_series_csv(const std::filesystem::path& path,
                                     std::string_view value_column,
                                     std::string series_name = {}) {
    const std::vector<std::string> lines = split_lines(read_text_file(path));
    if (lines.empty()) throw MalformedRow(path.string() + ": empty file");

    const std::vector<std::string> header = split_csv_line(lines.front());
    std::size_t value_index = header.size();
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] == value_column) value_index = i;
    }
    if (value_index == header.size()) {
        throw MissingColumn(path.string() + ": no column named '" + std::string(value_column) + "'");
    }

    std::vector<Observation> obs;
    std::vector<MonthStamp> missing;
    for (std::size_t lineno = 1; lineno < lines.size(); ++lineno) {
        const std::string& line = lines[lineno];
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() <= value_index) {
            throw MalformedRow(path.string() + ":" + std::to_string(lineno + 1) +
                               ": expected " + std::to_string(value_index + 1) + " fields");
        }
        const auto date = parse_iso_date(fields[0]);
        if (!date) {
            throw MalformedRow(path.string() + ":" + std::to_string(lineno + 1) +
                               ": bad date '" + fields[0] + "'");
        }
        if (date->second != 1) {
            throw MalformedRow(path.string() + ":" + std::to_string(lineno + 1) +
                               ": monthly observations must be stamped on the first of the month");
        }
        const std::string& cell = fields[value_index];
        if (cell == ".") {
            missing.push_back(date->first);
            continue;
        }
        double value = 0.0;
        if (!parse_double(cell, value)) {
            throw MalformedRow(path.string() + ":" + std::to_string(lineno + 1) +
                               ": bad value '" + cell + "'");
        }
        obs.push_back({date->first, value});
    }

    std::stable_sort(obs.begin(), obs.end(),
                     [](const Observation& a, const Observation& b) { return a.stamp < b.stamp; });
    for (std::size_t i = 1; i < obs.size(); ++i) {
        if (obs[i].stamp == obs[i - 1].stamp) {
            throw DuplicateMonth(path.string() + ": duplicate month " + to_string(obs[i].stamp));
        }
    }
    if (series_name.empty()) series_name = std::string(value_column);
    return ParsedSeries{Series(std::move(series_name), std::move(obs)), std::move(missing)};
}

/// Balances the nine parsed series into a Panel over the configured window.
/// Series are matched to the config by name, so argument order is irrelevant.
inline Panel assemble_panel(const IngestConfig& config, const std::vector<Series>& series) {
    if (series.size() != 9) {
        throw WrongSeriesCount("expected 9 series, got " + std::to_string(series.size()));
    }
    std::map<std::string, const Series*> by_name;
    for (const Series& s : series) {
        if (!by_name.emplace(s.name(), &s).second) {
            throw WrongSeriesCount("series " + s.name() + " supplied more than once");
        }
    }
    auto lookup = [&](std::string_view name) -> const Series& {
        auto it = by_name.find(std::string(name));
        if (it == by_name.end()) throw WrongSeriesCount("missing series " + std::string(name));
        return *it->second;
    };

    // Every (series, month) cell must exist inside the window.
    std::vector<Hole> holes;
    const int window = months_between(config.panel_start, config.panel_end) + 1;
    auto check = [&](const Series& s) {
        for (int k = 0; k < window; ++k) {
            const MonthStamp m = advance(config.panel_start, k);
            if (s.find(m) == nullptr) holes.push_back({s.name(), m});
        }
    };
    for (std::string_view n : kTargetNames) check(lookup(n));
    for (std::string_view n : kFeatureNames) check(lookup(n));
    if (!holes.empty()) throw UnbalancedPanel(std::move(holes));

    std::array<Series, 3> targets = {slice(lookup(kTargetNames[0]), config.panel_start, config.panel_end),
                                     slice(lookup(kTargetNames[1]), config.panel_start, config.panel_end),
                                     slice(lookup(kTargetNames[2]), config.panel_start, config.panel_end)};
    std::array<Series, 6> features = {slice(lookup(kFeatureNames[0]), config.panel_start, config.panel_end),
                                      slice(lookup(kFeatureNames[1]), config.panel_start, config.panel_end),
                                      slice(lookup(kFeatureNames[2]), config.panel_start, config.panel_end),
                                      slice(lookup(kFeatureNames[3]), config.panel_start, config.panel_end),
                                      slice(lookup(kFeatureNames[4]), config.panel_start, config.panel_end),
                                      slice(lookup(kFeatureNames[5]), config.panel_start, config.panel_end)};
    return Panel(std::move(targets), std::move(features));
}

// ---------------------------------------------------------------------------
// Canonical panel CSV and per-series round trips
// ---------------------------------------------------------------------------

inline constexpr std::string_view kPanelHeader =
    "month,EM.T,BA.T,CTS.T,BA.F,IN.F,CTS.F,CNS.F,MN.F,IT.F";

/// Canonical panel CSV: one row per month, full round-trip precision.
inline std::string render_panel_csv(const Panel& panel) {
    std::string out;
    out += kPanelHeader;
    out += '\n';
    const auto series = panel.all_series();
    for (std::size_t t = 0; t < panel.length(); ++t) {
        out += to_string(panel.stamp(t));
        for (const Series* s : series) {
            out += ',';
            out += format_double(s->observations()[t].value);
        }
        out += '\n';
    }
    return out;
}

inline void write_panel_csv(const Panel& panel, const std::filesystem::path& path) {
    write_file_atomic(path, render_panel_csv(panel));
}

inline Panel read_panel_csv(const std::filesystem::path& path) {
    std::vector<std::string> lines;
    try {
        lines = split_lines(read_text_file(path));
    } catch (const FileUnreadable& e) {
        throw PanelUnreadable(e.what());
    }
    if (lines.empty() || lines.front() != kPanelHeader) {
        throw PanelUnreadable(path.string() + ": expected header '" + std::string(kPanelHeader) + "'");
    }
    std::vector<std::vector<Observation>> columns(9);
    for (std::size_t lineno = 1; lineno < lines.size(); ++lineno) {
        const std::vector<std::string> fields = split_csv_line(lines[lineno]);
        if (fields.size() != 10) {
            throw PanelUnreadable(path.string() + ":" + std::to_string(lineno + 1) +
                                  ": expected 10 fields");
        }
        const auto stamp = parse_month(fields[0]);
        if (!stamp) {
            throw PanelUnreadable(path.string() + ":" + std::to_string(lineno + 1) +
                                  ": bad month '" + fields[0] + "'");
        }
        for (std::size_t j = 0; j < 9; ++j) {
            double v = 0.0;
            if (!parse_double(fields[j + 1], v)) {
                throw PanelUnreadable(path.string() + ":" + std::to_string(lineno + 1) +
                                      ": bad value '" + fields[j + 1] + "'");
            }
            columns[j].push_back({*stamp, v});
        }
    }
    if (columns[0].empty()) throw PanelUnreadable(path.string() + ": no data rows");
    try {
        std::array<Series, 3> targets = {Series(std::string(kTargetNames[0]), columns[0]),
                                         Series(std::string(kTargetNames[1]), columns[1]),
                                         Series(std::string(kTargetNames[2]), columns[2])};
        std::array<Series, 6> features = {Series(std::string(kFeatureNames[0]), columns[3]),
                                          Series(std::string(kFeatureNames[1]), columns[4]),
                                          Series(std::string(kFeatureNames[2]), columns[5]),
                                          Series(std::string(kFeatureNames[3]), columns[6]),
                                          Series(std::string(kFeatureNames[4]), columns[7]),
                                          Series(std::string(kFeatureNames[5]), columns[8])};
        return Panel(std::move(targets), std::move(features));
    } catch (const std::invalid_argument& e) {
        throw PanelUnreadable(path.string() + ": " + e.what());
    }
}

/// Writes one series back out in the ingestible FRED layout.
inline void write_series_csv(const Series& series, const std::filesystem::path& path,
                             std::string_view column_name) {
    std::string out = "observation_date," + std::string(column_name) + "\n";
    for (const Observation& o : series.observations()) {
        out += to_string(o.stamp) + "-01," + format_double(o.value) + "\n";
    }
    write_file_atomic(path, out);
}

}  // namespace macrocast
