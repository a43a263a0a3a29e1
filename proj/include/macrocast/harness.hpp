#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "macrocast/ingest.hpp"
#include "macrocast/metrics.hpp"
#include "macrocast/regressor.hpp"
#include "macrocast/report.hpp"
#include "macrocast/supervised.hpp"
#include "macrocast/version.hpp"

namespace macrocast {

/// Full-run configuration: which panel, which evaluation schemes, which model
/// families and targets, one master seed, and where outputs land.
struct RunConfig {
    std::filesystem::path panel_path;
    std::vector<EvaluationScheme> schemes;
    std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
    std::vector<std::string> targets{kTargetNames.begin(), kTargetNames.end()};
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "results";
    std::size_t bootstrap_b = 2000;
    std::size_t threads = 0;  // 0 picks the hardware concurrency
    bool markdown = false;
    ModelOptions model_options{};
};

struct RunResult {
    std::filesystem::path manifest_path;
    std::vector<std::filesystem::path> outputs;
    nlohmann::ordered_json manifest;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Seed chain for one (target, model, scheme) group. Adding models, targets,
/// or schemes to a run cannot disturb any other group's stream.
inline std::uint64_t group_seed(std::uint64_t master, std::string_view target, ModelKind model,
                                std::string_view scheme) {
    std::uint64_t s = mix_seed(master, fnv1a64(target));
    s = mix_seed(s, fnv1a64(to_string(model)));
    s = mix_seed(s, fnv1a64(scheme));
    return s;
}

struct TaskSpec {
    std::size_t scheme_index = 0;
    std::string scheme;
    std::size_t target_index = 0;
    std::string target;
    ModelKind model = ModelKind::Sgd;
    std::size_t fold_index = 0;
    Fold fold;
    std::uint64_t seed = 0;
};

struct TaskOutcome {
    std::string status = "ok";  // "ok" or the failure kind
    std::vector<std::optional<double>> predictions;  // one per test row
    double wall_ms = 0.0;
};

inline void canonicalize(RunConfig& config) {
    std::vector<ModelKind> models;
    for (ModelKind kind : kAllModels) {
        if (std::find(config.models.begin(), config.models.end(), kind) != config.models.end()) {
            models.push_back(kind);
        }
    }
    if (models.size() != config.models.size()) {
        throw ConfigInvalid("duplicate model in configuration");
    }
    config.models = std::move(models);

    std::vector<std::string> targets;
    for (std::string_view name : kTargetNames) {
        const auto it = std::find(config.targets.begin(), config.targets.end(), name);
        if (it != config.targets.end()) targets.emplace_back(name);
    }
    if (targets.size() != config.targets.size()) {
        throw ConfigInvalid("unknown or duplicate target in configuration");
    }
    config.targets = std::move(targets);

    if (config.schemes.empty() || config.models.empty() || config.targets.empty()) {
        throw ConfigInvalid("run needs at least one scheme, one model, and one target");
    }
    if (config.threads == 0) {
        config.threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
}

}  // namespace detail

/// Executes the full benchmark over an already-loaded panel and writes metric
/// tables, per-fold diagnostics, prediction trajectories, and a manifest.
/// Model-level failures degrade to missing predictions for the affected fold;
/// they never abort the run.
inline RunResult run_on_panel(const Panel& panel, RunConfig config) {
    detail::canonicalize(config);
    const std::string panel_hash = detail::hex64(fnv1a64(render_panel_csv(panel)));
    const auto run_start = std::chrono::steady_clock::now();

    // Shared inputs: one lagged dataset per target, folds per (scheme, target).
    std::vector<SupervisedDataset> datasets;
    for (const std::string& target : config.targets) datasets.push_back(build_lagged(panel, target));

    std::vector<std::string> scheme_labels;
    for (const EvaluationScheme& s : config.schemes) scheme_labels.push_back(scheme_label(s));

    std::vector<detail::TaskSpec> tasks;
    for (std::size_t si = 0; si < config.schemes.size(); ++si) {
        for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
            const std::vector<Fold> fold_list = folds(datasets[ti], config.schemes[si]);
            for (ModelKind model : config.models) {
                const std::uint64_t gseed = detail::group_seed(config.seed, config.targets[ti],
                                                               model, scheme_labels[si]);
                for (const Fold& fold : fold_list) {
                    detail::TaskSpec task;
                    task.scheme_index = si;
                    task.scheme = scheme_labels[si];
                    task.target_index = ti;
                    task.target = config.targets[ti];
                    task.model = model;
                    task.fold_index = fold.index;
                    task.fold = fold;
                    task.seed = mix_seed(gseed, fold.index);
                    tasks.push_back(std::move(task));
                }
            }
        }
    }

    // Work pool over independent tasks; per-task seeding makes the schedule
    // observationally irrelevant.
    std::vector<detail::TaskOutcome> outcomes(tasks.size());
    {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> panic{false};
        std::string panic_message;
        std::mutex panic_mutex;
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size() || panic.load()) break;
                const detail::TaskSpec& task = tasks[i];
                detail::TaskOutcome& outcome = outcomes[i];
                const auto t0 = std::chrono::steady_clock::now();
                const SupervisedDataset& ds = datasets[task.target_index];
                const std::span<const SupervisedRow> all(ds.rows);
                const auto train = all.subspan(task.fold.train.begin, task.fold.train.size());
                const auto test = all.subspan(task.fold.test.begin, task.fold.test.size());
                try {
                    auto model = make_regressor(task.model, task.seed, config.model_options);
                    model->fit(train);
                    const std::vector<double> pred = model->predict(test);
                    outcome.predictions.assign(pred.begin(), pred.end());
                } catch (const Error& e) {
                    outcome.status = e.kind();
                    outcome.predictions.assign(test.size(), std::nullopt);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(panic_mutex);
                    panic_message = e.what();
                    panic.store(true);
                }
                outcome.wall_ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - t0)
                                      .count();
            }
        };
        std::vector<std::thread> pool;
        const std::size_t workers = std::min(config.threads, std::max<std::size_t>(tasks.size(), 1));
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (panic.load()) throw std::runtime_error("internal task failure: " + panic_message);
    }

    // Gather in deterministic task order.
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    RunResult result;
    nlohmann::ordered_json manifest_tasks = nlohmann::ordered_json::array();
    std::map<std::string, std::string> output_hashes;  // filename -> hash, ordered

    auto write_output = [&](const std::string& filename, const std::string& content) {
        write_file_atomic(config.out_dir / filename, content);
        output_hashes[filename] = detail::hex64(fnv1a64(content));
        result.outputs.push_back(config.out_dir / filename);
    };

    for (std::size_t si = 0; si < config.schemes.size(); ++si) {
        std::vector<MetricRow> metric_rows;
        std::vector<FoldMetricRow> fold_rows;
        std::vector<PredictionTable> tables;

        for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
            const SupervisedDataset& ds = datasets[ti];
            PredictionTable table;
            table.target = config.targets[ti];

            for (ModelKind model : config.models) {
                // pool every fold of this (scheme, target, model) group
                PredictionSet pooled;
                std::vector<std::string> reasons;
                bool stamps_filled = !table.stamps.empty();
                for (std::size_t i = 0; i < tasks.size(); ++i) {
                    const detail::TaskSpec& task = tasks[i];
                    if (task.scheme_index != si || task.target_index != ti || task.model != model) {
                        continue;
                    }
                    const detail::TaskOutcome& outcome = outcomes[i];
                    for (std::size_t r = 0; r < task.fold.test.size(); ++r) {
                        const SupervisedRow& row = ds.rows[task.fold.test.begin + r];
                        pooled.push_back({row.stamp, row.y, outcome.predictions[r]});
                    }
                    if (outcome.status != "ok" &&
                        std::find(reasons.begin(), reasons.end(), outcome.status) == reasons.end()) {
                        reasons.push_back(outcome.status);
                    }
                    FoldMetricRow fr;
                    fr.target = config.targets[ti];
                    fr.model = model;
                    fr.fold = task.fold_index;
                    fr.train_start = ds.rows[task.fold.train.begin].stamp;
                    fr.train_end = ds.rows[task.fold.train.end - 1].stamp;
                    fr.test_start = ds.rows[task.fold.test.begin].stamp;
                    fr.test_end = ds.rows[task.fold.test.end - 1].stamp;
                    fr.n_total = task.fold.test.size();
                    fr.status = outcome.status;
                    PredictionSet fold_set(pooled.end() - static_cast<std::ptrdiff_t>(task.fold.test.size()),
                                           pooled.end());
                    for (const PredictionRecord& r : fold_set) fr.n_evaluated += r.predicted ? 1 : 0;
                    try {
                        const MetricReport m = compute_metrics(fold_set, 0, 0);
                        fr.mae = m.mae;
                        fr.rmse = m.rmse;
                        fr.nrmse = m.nrmse;
                    } catch (const Error&) {
                        // fold diagnostics stay blank when no metric is defined
                    }
                    fold_rows.push_back(std::move(fr));

                    nlohmann::ordered_json t;
                    t["target"] = task.target;
                    t["model"] = to_string(model);
                    t["scheme"] = task.scheme;
                    t["fold"] = task.fold_index;
                    t["seed"] = detail::hex64(task.seed);
                    t["status"] = outcome.status == "ok" ? "ok" : "missing-predictions";
                    if (outcome.status != "ok") t["reason"] = outcome.status;
                    t["wall_ms"] = outcome.wall_ms;
                    manifest_tasks.push_back(std::move(t));
                }

                if (!stamps_filled) {
                    for (const PredictionRecord& r : pooled) {
                        table.stamps.push_back(r.stamp);
                        table.observed.push_back(r.observed);
                    }
                }
                PredictionColumn column;
                column.model = model;
                for (const PredictionRecord& r : pooled) column.values.push_back(r.predicted);
                table.columns.push_back(std::move(column));

                MetricRow row;
                row.target = config.targets[ti];
                row.model = model;
                row.n_total = pooled.size();
                std::size_t evaluated = 0;
                for (const PredictionRecord& r : pooled) evaluated += r.predicted ? 1 : 0;
                row.n_evaluated = evaluated;
                row.coverage = pooled.empty() ? 0.0
                                              : static_cast<double>(evaluated) /
                                                    static_cast<double>(pooled.size());
                if (evaluated > 0) {
                    const std::uint64_t metric_seed =
                        mix_seed(detail::group_seed(config.seed, config.targets[ti], model,
                                                    scheme_labels[si]),
                                 fnv1a64("bootstrap"));
                    try {
                        row.report = compute_metrics(pooled, config.bootstrap_b, metric_seed);
                    } catch (const Error& e) {
                        reasons.push_back(e.kind());
                    }
                }
                if (!reasons.empty()) {
                    std::sort(reasons.begin(), reasons.end());
                    reasons.erase(std::unique(reasons.begin(), reasons.end()), reasons.end());
                    std::string status;
                    for (const std::string& r : reasons) {
                        if (!status.empty()) status += '|';
                        status += r;
                    }
                    row.status = status;
                }
                metric_rows.push_back(std::move(row));
            }
            tables.push_back(std::move(table));
        }

        write_output("metrics_" + scheme_labels[si] + ".csv", render_metrics_csv(metric_rows));
        if (config.markdown) {
            write_output("metrics_" + scheme_labels[si] + ".md",
                         render_metrics_markdown(metric_rows, scheme_labels[si]));
        }
        write_output("fold_metrics_" + scheme_labels[si] + ".csv",
                     render_fold_metrics_csv(fold_rows));
        for (const PredictionTable& table : tables) {
            write_output("predictions_" + scheme_labels[si] + "_" + table.target + ".csv",
                         render_predictions_csv(table));
        }
    }

    // Manifest: configuration echo, content hashes, per-task record, timings.
    nlohmann::ordered_json manifest;
    manifest["version"] = kVersion;
    nlohmann::ordered_json cfg;
    cfg["panel"] = config.panel_path.string();
    cfg["schemes"] = scheme_labels;
    {
        std::vector<std::string> names;
        for (ModelKind m : config.models) names.emplace_back(to_string(m));
        cfg["models"] = names;
    }
    cfg["targets"] = config.targets;
    cfg["seed"] = config.seed;
    cfg["bootstrap_b"] = config.bootstrap_b;
    if (config.model_options.arima_order) {
        cfg["arima_order"] = to_string(*config.model_options.arima_order);
    }
    manifest["config"] = std::move(cfg);
    manifest["panel_hash"] = panel_hash;
    manifest["tasks"] = std::move(manifest_tasks);
    nlohmann::ordered_json outputs_json;
    std::string combined;
    for (const auto& [name, hash] : output_hashes) {
        outputs_json[name] = hash;
        combined += name + ":" + hash + "\n";
    }
    manifest["outputs"] = std::move(outputs_json);
    manifest["results_hash"] = detail::hex64(fnv1a64(combined));
    manifest["total_wall_ms"] = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - run_start)
                                    .count();

    const std::string manifest_text = manifest.dump(2) + "\n";
    result.manifest_path = config.out_dir / "manifest.json";
    write_file_atomic(result.manifest_path, manifest_text);
    result.manifest = std::move(manifest);
    return result;
}

/// Reads the panel from config.panel_path and runs the benchmark.
inline RunResult run(const RunConfig& config) {
    const Panel panel = read_panel_csv(config.panel_path);
    return run_on_panel(panel, config);
}

}  // namespace macrocast
