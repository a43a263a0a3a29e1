// macrocast: lagged macro-to-health forecasting benchmark CLI.
//
// Subcommands:
//   ingest       parse per-series FRED CSVs into the canonical panel CSV
//   summarize    per-period descriptive statistics of a panel
//   evaluate     run models x targets x schemes and emit metric/prediction tables
//   report       render a metrics CSV as a Markdown table
//   predictions  print a prediction-trajectory table from a results directory
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macrocast/harness.hpp"
#include "macrocast/ingest.hpp"
#include "macrocast/series.hpp"
#include "macrocast/version.hpp"

namespace fs = std::filesystem;
using namespace macrocast;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) {
            if (start < text.size()) out.push_back(text.substr(start));
            break;
        }
        if (comma > start) out.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

int cmd_ingest(const fs::path& config_path, const fs::path& out_dir) {
    const IngestConfig config = IngestConfig::from_json_file(config_path);
    std::vector<Series> series;
    for (const SeriesSpec& spec : config.series) {
        ParsedSeries parsed = parse_series_csv(spec.path, spec.column, spec.name);
        for (const MonthStamp& m : parsed.missing) {
            std::cerr << "note: " << spec.name << " has a missing value marker at "
                      << to_string(m) << "\n";
        }
        series.push_back(std::move(parsed.series));
    }
    const Panel panel = assemble_panel(config, series);
    const fs::path out = out_dir / "panel.csv";
    write_panel_csv(panel, out);
    std::cout << "wrote " << out.string() << " (" << panel.length() << " months, "
              << to_string(panel.start()) << ".." << to_string(panel.end()) << ")\n";
    return 0;
}

int cmd_summarize(const fs::path& panel_path, const fs::path& out_dir) {
    const Panel panel = read_panel_csv(panel_path);
    const auto summaries = summarize(panel, default_periods());
    std::string csv = "variable,period,min,max,mean,sd\n";
    for (const PeriodSummary& s : summaries) {
        csv += s.variable + ',' + s.period + ',' + format_double(s.min) + ',' +
               format_double(s.max) + ',' + format_double(s.mean) + ',' + format_double(s.sd) +
               '\n';
    }
    const fs::path out = out_dir / "period_summaries.csv";
    write_file_atomic(out, csv);
    std::cout << "wrote " << out.string() << " (" << summaries.size() << " rows)\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config) {
    const RunResult result = run(config);
    for (const fs::path& p : result.outputs) std::cout << "wrote " << p.string() << "\n";
    std::cout << "wrote " << result.manifest_path.string() << "\n";
    return 0;
}

int cmd_report(const fs::path& in_dir, const std::string& scheme, const fs::path& out_file) {
    const EvaluationScheme parsed = parse_scheme(scheme);
    const fs::path csv_path = in_dir / ("metrics_" + scheme_label(parsed) + ".csv");
    const std::vector<std::string> lines = split_lines(read_text_file(csv_path));
    if (lines.empty() || lines.front() != kMetricsHeader) {
        throw PanelUnreadable(csv_path.string() + ": not a metrics table");
    }
    std::vector<MetricRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 9) throw MalformedRow(csv_path.string() + ": bad row " + lines[i]);
        MetricRow row;
        row.target = fields[0];
        row.model = parse_model(fields[1]);
        if (!fields[2].empty()) {
            MetricReport m;
            if (!parse_double(fields[2], m.mae) || !parse_double(fields[3], m.mae_ci_low) ||
                !parse_double(fields[4], m.mae_ci_high) || !parse_double(fields[5], m.rmse) ||
                !parse_double(fields[6], m.nrmse)) {
                throw MalformedRow(csv_path.string() + ": bad metric cell in " + lines[i]);
            }
            row.report = m;
        }
        if (!parse_double(fields[7], row.coverage)) {
            throw MalformedRow(csv_path.string() + ": bad coverage in " + lines[i]);
        }
        row.status = fields[8];
        rows.push_back(std::move(row));
    }
    const std::string markdown = render_metrics_markdown(rows, scheme_label(parsed));
    if (out_file.empty()) {
        std::cout << markdown;
    } else {
        write_file_atomic(out_file, markdown);
        std::cout << "wrote " << out_file.string() << "\n";
    }
    return 0;
}

int cmd_predictions(const fs::path& in_dir, const std::string& scheme, const std::string& target,
                    const fs::path& out_file) {
    const EvaluationScheme parsed = parse_scheme(scheme);
    const fs::path csv_path = in_dir / ("predictions_" + scheme_label(parsed) + "_" + target + ".csv");
    const std::string content = read_text_file(csv_path);
    if (out_file.empty()) {
        std::cout << content;
    } else {
        write_file_atomic(out_file, content);
        std::cout << "wrote " << out_file.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"macrocast: macroeconomic-to-public-health forecasting benchmark"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    fs::path out_dir = "results";
    app.add_option("--seed", seed, "master seed for every stochastic component");
    app.add_option("--out", out_dir, "output directory");

    auto* ingest = app.add_subcommand("ingest", "build the canonical panel CSV from FRED files");
    fs::path ingest_config;
    ingest->add_option("--config", ingest_config, "ingest configuration JSON")->required();

    auto* summarize_cmd = app.add_subcommand("summarize", "per-period descriptive statistics");
    fs::path summarize_panel;
    summarize_cmd->add_option("--panel", summarize_panel, "canonical panel CSV")->required();

    auto* evaluate = app.add_subcommand("evaluate", "run the forecasting benchmark");
    fs::path eval_panel;
    std::vector<std::string> scheme_args;
    std::string models_arg = "sgd,adam,lbfgs,gam,arima,rf";
    std::string targets_arg = "EM.T,BA.T,CTS.T";
    std::size_t bootstrap_b = 2000;
    std::size_t threads = 0;
    bool markdown = false;
    std::string arima_order_arg;
    fs::path run_config_path;
    evaluate->add_option("--panel", eval_panel, "canonical panel CSV");
    evaluate->add_option("--scheme", scheme_args,
                         "evaluation scheme (repeatable): 80-20 or rolling:W-H");
    evaluate->add_option("--models", models_arg, "comma list of sgd,adam,lbfgs,gam,arima,rf");
    evaluate->add_option("--targets", targets_arg, "comma list of EM.T,BA.T,CTS.T");
    evaluate->add_option("--bootstrap", bootstrap_b, "bootstrap resamples for the MAE interval");
    evaluate->add_option("--threads", threads, "worker threads (0 = hardware)");
    evaluate->add_flag("--markdown", markdown, "also render Markdown metric tables");
    evaluate->add_option("--arima-order", arima_order_arg, "fix the ARIMA order as p,d,q");
    evaluate->add_option("--config", run_config_path, "run configuration JSON (flags override)");

    auto* report = app.add_subcommand("report", "render a metrics table as Markdown");
    fs::path report_in = "results";
    std::string report_scheme = "80-20";
    fs::path report_out;
    report->add_option("--in", report_in, "results directory");
    report->add_option("--scheme", report_scheme, "scheme to render");
    report->add_option("--out-file", report_out, "write here instead of stdout");

    auto* predictions = app.add_subcommand("predictions", "print a prediction-trajectory table");
    fs::path pred_in = "results";
    std::string pred_scheme = "80-20";
    std::string pred_target = "EM.T";
    fs::path pred_out;
    predictions->add_option("--in", pred_in, "results directory");
    predictions->add_option("--scheme", pred_scheme, "scheme of the table");
    predictions->add_option("--target", pred_target, "target of the table");
    predictions->add_option("--out-file", pred_out, "write here instead of stdout");

    // the global flags read naturally after a subcommand as well
    for (CLI::App* sub : {ingest, summarize_cmd, evaluate, report, predictions}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // flag mistakes are configuration errors
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(ingest_config, out_dir);
        if (app.got_subcommand(summarize_cmd)) return cmd_summarize(summarize_panel, out_dir);
        if (app.got_subcommand(evaluate)) {
            RunConfig config;
            if (!run_config_path.empty()) {
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(read_text_file(run_config_path));
                } catch (const nlohmann::json::exception& e) {
                    throw ConfigInvalid("run config: " + std::string(e.what()));
                }
                if (j.contains("panel")) eval_panel = j["panel"].get<std::string>();
                if (j.contains("schemes")) scheme_args = j["schemes"].get<std::vector<std::string>>();
                if (j.contains("models")) models_arg = j["models"].get<std::string>();
                if (j.contains("targets")) targets_arg = j["targets"].get<std::string>();
                if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
                if (j.contains("bootstrap_b")) bootstrap_b = j["bootstrap_b"].get<std::size_t>();
                if (j.contains("out")) out_dir = j["out"].get<std::string>();
            }
            if (eval_panel.empty()) throw ConfigInvalid("evaluate needs --panel");
            if (scheme_args.empty()) scheme_args = {"80-20", "rolling:12-4"};
            config.panel_path = eval_panel;
            for (const std::string& s : scheme_args) config.schemes.push_back(parse_scheme(s));
            config.models.clear();
            for (const std::string& m : split_list(models_arg)) config.models.push_back(parse_model(m));
            config.targets = split_list(targets_arg);
            config.seed = seed;
            config.out_dir = out_dir;
            config.bootstrap_b = bootstrap_b;
            config.threads = threads;
            config.markdown = markdown;
            if (!arima_order_arg.empty()) {
                const auto parts = split_list(arima_order_arg);
                ArimaOrder order;
                if (parts.size() != 3 || !detail::parse_int(parts[0], order.p) ||
                    !detail::parse_int(parts[1], order.d) || !detail::parse_int(parts[2], order.q) ||
                    order.p < 0 || order.d < 0 || order.q < 0) {
                    throw ConfigInvalid("--arima-order expects p,d,q");
                }
                config.model_options.arima_order = order;
            }
            return cmd_evaluate(config);
        }
        if (app.got_subcommand(report)) return cmd_report(report_in, report_scheme, report_out);
        if (app.got_subcommand(predictions)) {
            return cmd_predictions(pred_in, pred_scheme, pred_target, pred_out);
        }
    } catch (const ConfigInvalid& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "data error [" << e.kind() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
