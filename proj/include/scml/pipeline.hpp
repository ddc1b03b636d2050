#pragma once

#include <json.hpp>

#include "scml/evaluate.hpp"
#include "scml/explain.hpp"
#include "scml/tune.hpp"

namespace scml {

struct DataConfig {
    std::string path;
    std::string target;
    SchemaOverrides schema;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static DataConfig from_json(const nlohmann::json& j);
};

struct TuneConfig {
    std::string method = "none";  // grid | random | bayes | none
    std::size_t budget = 25;
    TuneLoss loss = TuneLoss::one_minus_auroc;

    nlohmann::json to_json() const;
    static TuneConfig from_json(const nlohmann::json& j);
};

struct EvaluateConfig {
    std::size_t k_folds = 10;
    double threshold = 0.5;

    nlohmann::json to_json() const;
    static EvaluateConfig from_json(const nlohmann::json& j);
};

struct ExplainConfig {
    ExplainMethod method = ExplainMethod::auto_select;
    std::size_t background_size = 100;
    std::size_t sample_size = 200;

    nlohmann::json to_json() const;
    static ExplainConfig from_json(const nlohmann::json& j);
};

struct PipelineConfig {
    DataConfig data;
    PreprocessConfig preprocess;
    ResampleSpec resample;
    SelectConfig select;
    std::vector<LearnerSpec> learners;
    TuneConfig tune;
    EvaluateConfig eval;
    ExplainConfig explain;
    std::string output_dir = "out";
    bool ensemble_top3 = false;

    void validate() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

struct LeaderboardRow {
    std::string learner;
    bool tuned = false;
    std::map<std::string, double> params;  // tuned parameters, empty otherwise
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, auroc = 0, pr_auc = 0;
    double fit_seconds = 0, predict_seconds = 0, critical_ratio = 0;
    CurvePoints roc, pr;  // pooled across CV folds; not serialized in the row

    nlohmann::json to_json() const;
};

struct LearnerFailure {
    std::string learner;
    bool tuned = false;
    std::string message;
};

struct Leaderboard {
    std::vector<LeaderboardRow> rows;
    std::vector<LearnerFailure> failures;

    /// Stable descending sort by any metric column (ascending for seconds).
    void sort_by(const std::string& column);
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

struct ModelArtifact {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    PipelineConfig config;
    TrainedPipeline pipeline;
    EvalReport report;
    std::string created;  // ISO 8601, recorded once at build time
    /// Raw feature columns predict_batch requires, in training order.
    std::vector<std::pair<std::string, ColumnKind>> feature_columns;
    std::string target_name;
    std::array<std::string, 2> label_names{};

    nlohmann::json to_json() const;
    static ModelArtifact from_json(const nlohmann::json& j);
};

void save_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_artifact(const std::string& path);

struct RunResult {
    Leaderboard leaderboard;
    ModelArtifact artifact;
    GlobalImportance importance;            // of the winning model
    std::vector<std::string> explained_features;  // transformed-space names
    bool has_holdout = false;
    EvalReport holdout;  // single-split evaluation when train_fraction < 1
};

/// Cross-validates every configured learner (tuned and untuned when tuning is
/// enabled), assembles the leaderboard, refits the best learner on the full
/// training split, and explains it. Learner failures are isolated; the run
/// fails only when nothing survives.
RunResult run_automl(const PipelineConfig& config, const Table& table);

/// Loads the table from config.data first.
RunResult run_automl(const PipelineConfig& config);

/// The artifact's required feature columns pulled out of a raw table, in
/// training order. Extra columns are ignored; a missing required column is an
/// error naming the column, as is a kind mismatch.
Table assemble_features(const ModelArtifact& artifact, const Table& raw);

/// Scores raw rows through the artifact's saved stages.
std::pair<std::vector<int>, std::vector<double>> predict_batch(const ModelArtifact& artifact,
                                                               const Table& raw);

/// Single-split evaluation of an artifact on labeled data.
EvalReport evaluate_artifact(const ModelArtifact& artifact, const Table& data);

/// Writes leaderboard CSV/JSON, per-row ROC/PR curve CSVs, an ROC overlay
/// SVG, a critical-ratio bar SVG, and any extra named JSON documents.
void emit_reports(const Leaderboard& leaderboard,
                  const std::map<std::string, nlohmann::json>& extra,
                  const std::string& out_dir);

nlohmann::json trained_pipeline_to_json(const TrainedPipeline& tp);
TrainedPipeline trained_pipeline_from_json(const nlohmann::json& j);

}  // namespace scml
