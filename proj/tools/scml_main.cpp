#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "scml/pipeline.hpp"
#include "scml/synthgen.hpp"

namespace fs = std::filesystem;
using scml::ConfigError;
using scml::DataError;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + std::string(e.what()));
    }
    return j;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
}

void emit(const json& doc, const std::string& out_path) {
    if (out_path.empty())
        std::cout << doc.dump(2) << '\n';
    else
        write_text(out_path, doc.dump(2) + "\n");
}

scml::SchemaOverrides parse_schema(const std::vector<std::string>& entries) {
    scml::SchemaOverrides schema;
    for (const auto& entry : entries) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ConfigError("schema override '" + entry + "' is not name=kind");
        schema[entry.substr(0, eq)] = scml::column_kind_from_string(entry.substr(eq + 1));
    }
    return schema;
}

scml::PipelineConfig load_config(const std::string& path) {
    return scml::PipelineConfig::from_json(read_json_file(path));
}

struct CommonOverrides {
    std::string data_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    void apply(scml::PipelineConfig& config) const {
        if (!data_path.empty()) config.data.path = data_path;
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (seed) config.data.seed = *seed;
    }
};

int run_training(const scml::PipelineConfig& config) {
    const scml::RunResult run = scml::run_automl(config);
    fs::create_directories(config.output_dir);

    std::map<std::string, json> extra;
    extra["config"] = config.to_json();
    json importance_doc = run.importance.to_json();
    importance_doc["features"] = run.explained_features;
    extra["importance"] = importance_doc;
    if (run.has_holdout) extra["holdout"] = run.holdout.to_json();
    scml::emit_reports(run.leaderboard, extra, config.output_dir);

    const std::string artifact_path = (fs::path(config.output_dir) / "model.json").string();
    scml::save_artifact(run.artifact, artifact_path);
    write_text((fs::path(config.output_dir) / "importance.svg").string(),
               scml::importance_to_svg(run.importance, run.explained_features));

    scml::Leaderboard ranked = run.leaderboard;
    ranked.sort_by("auroc");
    std::cout << ranked.to_csv();
    for (const auto& f : run.leaderboard.failures)
        std::cerr << "failed: " << f.learner << (f.tuned ? " (tuned)" : "") << ": " << f.message
                  << '\n';
    std::cout << "artifact: " << artifact_path << '\n';
    return 0;
}

scml::ModelArtifact load_artifact_checked(const std::string& path) {
    if (path.empty()) throw ConfigError("--artifact is required");
    return scml::load_artifact(path);
}

// Rebuild plot curves for `report` from the CSVs a train run wrote.
scml::CurvePoints curve_from_csv(const fs::path& path) {
    scml::CurvePoints curve;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        curve.thresholds.push_back(std::stod(cell));
        std::getline(row, cell, ',');
        curve.x.push_back(std::stod(cell));
        std::getline(row, cell, ',');
        curve.y.push_back(std::stod(cell));
    }
    return curve;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automated machine learning for imbalanced tabular classification"};
    app.require_subcommand(1);

    std::optional<int> threads;
    app.add_option("--threads", threads, "Worker thread cap (default: hardware, or SCML_THREADS)");

    // profile
    auto* profile_cmd = app.add_subcommand("profile", "Summarize a CSV column by column");
    std::string profile_csv, profile_target, profile_out;
    std::vector<std::string> profile_schema;
    profile_cmd->add_option("csv", profile_csv, "Input CSV")->required();
    profile_cmd->add_option("--target", profile_target, "Target column name");
    profile_cmd->add_option("--schema", profile_schema, "Column kind overrides, name=numeric|categorical");
    profile_cmd->add_option("--out", profile_out, "Write JSON here instead of stdout");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
    std::string synth_shape = "backorder", synth_out, synth_spec_out;
    std::optional<std::size_t> synth_rows;
    std::optional<double> synth_rate, synth_signal, synth_noise;
    std::uint64_t synth_seed = 0;
    bool synth_ceiling = false;
    synth_cmd->add_option("--shape", synth_shape, "fraud | failure | backorder");
    synth_cmd->add_option("--rows", synth_rows, "Row count");
    synth_cmd->add_option("--positive-rate", synth_rate, "Positive class share, in (0, 0.5]");
    synth_cmd->add_option("--signal", synth_signal, "Class separation strength");
    synth_cmd->add_option("--noise", synth_noise, "Extra noise scale");
    synth_cmd->add_option("--seed", synth_seed, "Generator seed");
    synth_cmd->add_option("--out", synth_out, "Output CSV path")->required();
    synth_cmd->add_option("--spec-out", synth_spec_out, "Also write the generator spec JSON");
    synth_cmd->add_flag("--ceiling", synth_ceiling, "Print the Bayes-optimal AUROC");

    // train / tune
    auto* train_cmd = app.add_subcommand("train", "Run the full training pipeline");
    std::string train_config;
    CommonOverrides train_over;
    train_cmd->add_option("--config", train_config, "Pipeline config JSON")->required();
    train_cmd->add_option("--data", train_over.data_path, "Override the config's data path");
    train_cmd->add_option("--out-dir", train_over.out_dir, "Override the output directory");
    train_cmd->add_option("--seed", train_over.seed, "Override the protocol seed");

    auto* tune_cmd = app.add_subcommand("tune", "Train with hyper-parameter tuning forced on");
    std::string tune_config, tune_method = "grid";
    std::optional<std::size_t> tune_budget;
    CommonOverrides tune_over;
    tune_cmd->add_option("--config", tune_config, "Pipeline config JSON")->required();
    tune_cmd->add_option("--method", tune_method, "grid | random | bayes");
    tune_cmd->add_option("--budget", tune_budget, "Trial budget");
    tune_cmd->add_option("--data", tune_over.data_path, "Override the config's data path");
    tune_cmd->add_option("--out-dir", tune_over.out_dir, "Override the output directory");
    tune_cmd->add_option("--seed", tune_over.seed, "Override the protocol seed");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a saved model on labeled data");
    std::string eval_artifact, eval_data, eval_out;
    eval_cmd->add_option("--artifact", eval_artifact, "Saved model JSON")->required();
    eval_cmd->add_option("--data", eval_data, "Labeled CSV")->required();
    eval_cmd->add_option("--out", eval_out, "Write the report here instead of stdout");

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "Attribute predictions to features");
    std::string explain_artifact, explain_data, explain_out_dir = ".";
    std::optional<std::size_t> explain_row;
    std::optional<std::size_t> explain_background;
    std::uint64_t explain_seed = 0;
    explain_cmd->add_option("--artifact", explain_artifact, "Saved model JSON")->required();
    explain_cmd->add_option("--data", explain_data, "Rows to explain (CSV)")->required();
    explain_cmd->add_option("--row", explain_row, "Explain this row only (0-based)");
    explain_cmd->add_option("--background", explain_background, "Background sample size");
    explain_cmd->add_option("--seed", explain_seed, "Sampling seed");
    explain_cmd->add_option("--out-dir", explain_out_dir, "Where to write JSON and SVG");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Score new rows with a saved model");
    std::string predict_artifact, predict_data, predict_out;
    predict_cmd->add_option("--artifact", predict_artifact, "Saved model JSON")->required();
    predict_cmd->add_option("--data", predict_data, "New rows (CSV)")->required();
    predict_cmd->add_option("--out", predict_out, "Predictions CSV")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Re-render the report bundle for a run");
    std::string report_dir;
    report_cmd->add_option("--run-dir", report_dir, "Directory a train run wrote")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message or help text
        return code == 0 ? 0 : 1;
    }

    try {
        if (threads) {
            if (*threads < 1) throw ConfigError("--threads must be at least 1");
            setenv("SCML_THREADS", std::to_string(*threads).c_str(), 1);
        }

        if (profile_cmd->parsed()) {
            const scml::Table t =
                scml::load_csv(profile_csv, parse_schema(profile_schema), profile_target);
            emit(scml::profile(t).to_json(), profile_out);
            return 0;
        }

        if (synth_cmd->parsed()) {
            scml::GeneratorSpec spec = scml::default_generator(scml::shape_from_string(synth_shape));
            if (synth_rows) spec.n_rows = *synth_rows;
            if (synth_rate) spec.positive_rate = *synth_rate;
            if (synth_signal) spec.signal_strength = *synth_signal;
            if (synth_noise) spec.noise = *synth_noise;
            spec.seed = synth_seed;
            spec.validate();
            const scml::Table t = scml::generate(spec);
            scml::save_csv(t, synth_out);
            if (!synth_spec_out.empty()) emit(spec.to_json(), synth_spec_out);
            if (synth_ceiling)
                std::cout << "bayes_optimal_auroc: " << scml::bayes_optimal_auroc(spec) << '\n';
            std::cout << "wrote " << t.n_rows << " rows to " << synth_out << '\n';
            return 0;
        }

        if (train_cmd->parsed()) {
            scml::PipelineConfig config = load_config(train_config);
            train_over.apply(config);
            return run_training(config);
        }

        if (tune_cmd->parsed()) {
            scml::PipelineConfig config = load_config(tune_config);
            tune_over.apply(config);
            config.tune.method = tune_method;
            if (tune_budget) config.tune.budget = *tune_budget;
            return run_training(config);
        }

        if (eval_cmd->parsed()) {
            const scml::ModelArtifact artifact = load_artifact_checked(eval_artifact);
            const scml::Table data = scml::load_csv(eval_data, artifact.config.data.schema,
                                                    artifact.target_name);
            emit(scml::evaluate_artifact(artifact, data).to_json(), eval_out);
            return 0;
        }

        if (explain_cmd->parsed()) {
            const scml::ModelArtifact artifact = load_artifact_checked(explain_artifact);
            scml::SchemaOverrides schema = artifact.config.data.schema;
            for (const auto& [name, kind] : artifact.feature_columns) schema.emplace(name, kind);
            const scml::Table data =
                scml::assemble_features(artifact, scml::load_csv(explain_data, schema, ""));
            const scml::Table transformed = scml::pipeline_transform(artifact.pipeline, data);
            std::vector<std::string> names;
            for (std::size_t j : transformed.feature_indices())
                names.push_back(transformed.columns[j].name);
            const scml::Matrix all = scml::feature_matrix(transformed);
            if (all.rows == 0) throw DataError("no rows to explain");

            const std::size_t bg_n = std::min(explain_background.value_or(100), all.rows);
            scml::Rng rng(explain_seed);
            auto perm = rng.permutation(all.rows);
            scml::Matrix background(bg_n, all.cols);
            for (std::size_t i = 0; i < bg_n; ++i)
                for (std::size_t j = 0; j < all.cols; ++j) background(i, j) = all(perm[i], j);

            fs::create_directories(explain_out_dir);
            const auto method = artifact.config.explain.method;
            if (explain_row) {
                if (*explain_row >= all.rows)
                    throw DataError("--row " + std::to_string(*explain_row) + " is out of range (" +
                                    std::to_string(all.rows) + " rows)");
                const std::vector<double> instance = all.row_copy(*explain_row);
                scml::Attribution attr;
                if (method == scml::ExplainMethod::kernel ||
                    (method == scml::ExplainMethod::auto_select && all.cols > 14))
                    attr = scml::kernel_shap(artifact.pipeline.model, instance, background, 2048,
                                             explain_seed);
                else
                    attr = scml::shapley_exact(artifact.pipeline.model, instance, background);
                const json doc = scml::force_plot_export(attr, names, instance);
                emit(doc, (fs::path(explain_out_dir) / "attribution.json").string());
                std::cout << "wrote " << (fs::path(explain_out_dir) / "attribution.json").string()
                          << '\n';
            } else {
                const std::size_t sample_n =
                    std::min(artifact.config.explain.sample_size, all.rows);
                scml::Matrix sample(sample_n, all.cols);
                for (std::size_t i = 0; i < sample_n; ++i) {
                    const std::size_t src = perm[(bg_n + i) % perm.size()];
                    for (std::size_t j = 0; j < all.cols; ++j) sample(i, j) = all(src, j);
                }
                const scml::GlobalImportance imp = scml::global_importance(
                    artifact.pipeline.model, sample, background, method, 2048, explain_seed);
                json doc = imp.to_json();
                doc["features"] = names;
                emit(doc, (fs::path(explain_out_dir) / "importance.json").string());
                write_text((fs::path(explain_out_dir) / "importance.svg").string(),
                           scml::importance_to_svg(imp, names));
                std::cout << "wrote " << (fs::path(explain_out_dir) / "importance.json").string()
                          << " and importance.svg\n";
            }
            return 0;
        }

        if (predict_cmd->parsed()) {
            const scml::ModelArtifact artifact = load_artifact_checked(predict_artifact);
            scml::SchemaOverrides schema = artifact.config.data.schema;
            for (const auto& [name, kind] : artifact.feature_columns) schema.emplace(name, kind);
            const scml::Table data = scml::load_csv(predict_data, schema, "");
            const auto [preds, probs] = scml::predict_batch(artifact, data);
            std::ostringstream out;
            out << "row,prediction,label,probability\n";
            out.precision(17);
            for (std::size_t i = 0; i < preds.size(); ++i)
                out << i << ',' << preds[i] << ',' << artifact.label_names[std::size_t(preds[i])]
                    << ',' << probs[i] << '\n';
            write_text(predict_out, out.str());
            std::cout << "wrote " << preds.size() << " predictions to " << predict_out << '\n';
            return 0;
        }

        if (report_cmd->parsed()) {
            const fs::path dir(report_dir);
            const fs::path board_path = dir / "leaderboard.json";
            if (!fs::exists(board_path))
                throw DataError("'" + board_path.string() + "' not found; is this a run directory?");
            const json board_json = read_json_file(board_path.string());
            scml::Leaderboard board;
            for (const auto& row_j : board_json.at("rows")) {
                scml::LeaderboardRow row;
                row.learner = row_j.at("learner").get<std::string>();
                row.tuned = row_j.at("tuned").get<bool>();
                for (auto it = row_j.at("params").begin(); it != row_j.at("params").end(); ++it)
                    row.params[it.key()] = it.value().get<double>();
                row.accuracy = row_j.at("accuracy").get<double>();
                row.precision = row_j.at("precision").get<double>();
                row.recall = row_j.at("recall").get<double>();
                row.f1 = row_j.at("f1").get<double>();
                row.auroc = row_j.at("auroc").get<double>();
                row.pr_auc = row_j.at("pr_auc").get<double>();
                row.fit_seconds = row_j.at("fit_seconds").get<double>();
                row.predict_seconds = row_j.at("predict_seconds").get<double>();
                row.critical_ratio = row_j.at("critical_ratio").get<double>();
                const std::string slug = row.learner + (row.tuned ? "_tuned" : "");
                const fs::path roc_csv = dir / ("roc_" + slug + ".csv");
                const fs::path pr_csv = dir / ("pr_" + slug + ".csv");
                if (fs::exists(roc_csv)) row.roc = curve_from_csv(roc_csv);
                if (fs::exists(pr_csv)) row.pr = curve_from_csv(pr_csv);
                board.rows.push_back(std::move(row));
            }
            scml::emit_reports(board, {}, report_dir);
            std::cout << "re-rendered reports in " << report_dir << '\n';
            return 0;
        }

        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
