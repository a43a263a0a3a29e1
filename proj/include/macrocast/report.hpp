#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macrocast/io_util.hpp"
#include "macrocast/metrics.hpp"
#include "macrocast/month.hpp"
#include "macrocast/regressor.hpp"

namespace macrocast {

/// One (target, model) line of a per-scheme metric table. `report` is empty
/// when the model produced no predictions; `status` is "ok" or the failure
/// kind(s) behind the gaps.
struct MetricRow {
    std::string target;
    ModelKind model = ModelKind::Sgd;
    std::optional<MetricReport> report;
    double coverage = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_total = 0;
    std::string status = "ok";
};

inline constexpr std::string_view kMetricsHeader =
    "target,model,mae,mae_ci_low,mae_ci_high,rmse,nrmse,coverage,status";

inline std::string render_metrics_csv(std::span<const MetricRow> rows) {
    std::string out{kMetricsHeader};
    out += '\n';
    for (const MetricRow& row : rows) {
        out += row.target;
        out += ',';
        out += to_string(row.model);
        out += ',';
        if (row.report) {
            out += format_double(row.report->mae) + ',' + format_double(row.report->mae_ci_low) +
                   ',' + format_double(row.report->mae_ci_high) + ',' +
                   format_double(row.report->rmse) + ',' + format_double(row.report->nrmse);
        } else {
            out += ",,,,";
        }
        out += ',' + format_double(row.coverage) + ',' + row.status + '\n';
    }
    return out;
}

/// Markdown rendering of a metric table, one block per target, MAE shown as
/// "point (low, high)" with two decimals.
inline std::string render_metrics_markdown(std::span<const MetricRow> rows,
                                           std::string_view scheme) {
    std::string out = "## Scheme " + std::string(scheme) + "\n\n";
    out += "| Target | Model | MAE (95% CI) | RMSE | N-RMSE | Coverage |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const MetricRow& row : rows) {
        out += "| " + row.target + " | " + std::string(display_name(row.model)) + " | ";
        if (row.report) {
            out += format_fixed2(row.report->mae) + " (" + format_fixed2(row.report->mae_ci_low) +
                   ", " + format_fixed2(row.report->mae_ci_high) + ") | " +
                   format_fixed2(row.report->rmse) + " | ";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", row.report->nrmse);
            out += buf;
        } else {
            out += "missing (" + row.status + ") | | ";
        }
        out += " | " + format_double(row.coverage) + " |\n";
    }
    return out;
}

/// Pooled test-month trajectories behind the metric rows: observed values and
/// one column per model, empty where a prediction is missing.
struct PredictionColumn {
    ModelKind model = ModelKind::Sgd;
    std::vector<std::optional<double>> values;
};

struct PredictionTable {
    std::string target;
    std::vector<MonthStamp> stamps;
    std::vector<double> observed;
    std::vector<PredictionColumn> columns;
};

inline std::string render_predictions_csv(const PredictionTable& table) {
    std::string out = "month,observed";
    for (const PredictionColumn& c : table.columns) {
        out += ',';
        out += to_string(c.model);
    }
    out += '\n';
    for (std::size_t i = 0; i < table.stamps.size(); ++i) {
        out += to_string(table.stamps[i]) + ',' + format_double(table.observed[i]);
        for (const PredictionColumn& c : table.columns) {
            out += ',';
            if (c.values[i]) out += format_double(*c.values[i]);
        }
        out += '\n';
    }
    return out;
}

/// Per-fold diagnostics kept alongside the pooled tables.
struct FoldMetricRow {
    std::string target;
    ModelKind model = ModelKind::Sgd;
    std::size_t fold = 0;
    MonthStamp train_start, train_end, test_start, test_end;
    std::optional<double> mae, rmse, nrmse;
    std::size_t n_evaluated = 0;
    std::size_t n_total = 0;
    std::string status = "ok";
};

inline constexpr std::string_view kFoldMetricsHeader =
    "target,model,fold,train_start,train_end,test_start,test_end,mae,rmse,nrmse,"
    "n_evaluated,n_total,status";

inline std::string render_fold_metrics_csv(std::span<const FoldMetricRow> rows) {
    std::string out{kFoldMetricsHeader};
    out += '\n';
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const FoldMetricRow& row : rows) {
        out += row.target + ',' + std::string(to_string(row.model)) + ',' +
               std::to_string(row.fold) + ',' + to_string(row.train_start) + ',' +
               to_string(row.train_end) + ',' + to_string(row.test_start) + ',' +
               to_string(row.test_end) + ',' + cell(row.mae) + ',' + cell(row.rmse) + ',' +
               cell(row.nrmse) + ',' + std::to_string(row.n_evaluated) + ',' +
               std::to_string(row.n_total) + ',' + row.status + '\n';
    }
    return out;
}

}  // namespace macrocast
