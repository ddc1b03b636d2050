#include "scml/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "scml/parallel.hpp"

namespace scml {

using nlohmann::json;

json DataConfig::to_json() const {
    json schema_j = json::object();
    for (const auto& [name, kind] : schema) schema_j[name] = to_string(kind);
    return json{{"path", path},
                {"target", target},
                {"schema", schema_j},
                {"train_fraction", train_fraction},
                {"seed", seed}};
}

DataConfig DataConfig::from_json(const json& j) {
    DataConfig d;
    d.path = j.value("path", std::string{});
    d.target = j.value("target", std::string{});
    if (j.contains("schema"))
        for (auto it = j.at("schema").begin(); it != j.at("schema").end(); ++it)
            d.schema[it.key()] = column_kind_from_string(it.value().get<std::string>());
    d.train_fraction = j.value("train_fraction", 0.8);
    d.seed = j.value("seed", std::uint64_t{0});
    return d;
}

json TuneConfig::to_json() const {
    return json{{"method", method}, {"budget", budget}, {"loss", to_string(loss)}};
}

TuneConfig TuneConfig::from_json(const json& j) {
    TuneConfig t;
    t.method = j.value("method", std::string{"none"});
    t.budget = j.value("budget", std::size_t{25});
    if (j.contains("loss")) t.loss = tune_loss_from_string(j.at("loss").get<std::string>());
    return t;
}

json EvaluateConfig::to_json() const {
    return json{{"k_folds", k_folds}, {"threshold", threshold}};
}

EvaluateConfig EvaluateConfig::from_json(const json& j) {
    EvaluateConfig e;
    e.k_folds = j.value("k_folds", std::size_t{10});
    e.threshold = j.value("threshold", 0.5);
    return e;
}

json ExplainConfig::to_json() const {
    return json{{"method", to_string(method)},
                {"background_size", background_size},
                {"sample_size", sample_size}};
}

ExplainConfig ExplainConfig::from_json(const json& j) {
    ExplainConfig e;
    if (j.contains("method")) e.method = explain_method_from_string(j.at("method").get<std::string>());
    e.background_size = j.value("background_size", std::size_t{100});
    e.sample_size = j.value("sample_size", std::size_t{200});
    return e;
}

void PipelineConfig::validate() const {
    if (tune.method != "none" && tune.method != "grid" && tune.method != "random" &&
        tune.method != "bayes")
        throw ConfigError("unknown tuning method '" + tune.method + "'");
    if (tune.method != "none" && tune.budget == 0)
        throw ConfigError("tuning budget must be positive");
    if (eval.k_folds < 2) throw ConfigError("k_folds must be at least 2");
    if (!(eval.threshold > 0.0 && eval.threshold < 1.0))
        throw ConfigError("decision threshold must lie strictly between 0 and 1");
    if (learners.empty()) throw ConfigError("at least one learner must be configured");
    if (!(data.train_fraction > 0.0 && data.train_fraction <= 1.0))
        throw ConfigError("train_fraction must lie in (0, 1]");
    resample.validate();
}

json PipelineConfig::to_json() const {
    json learners_j = json::array();
    for (const auto& l : learners) learners_j.push_back(l.to_json());
    return json{{"data", data.to_json()},
                {"preprocess", preprocess.to_json()},
                {"resample", resample.to_json()},
                {"select", select.to_json()},
                {"learners", learners_j},
                {"tune", tune.to_json()},
                {"evaluate", eval.to_json()},
                {"explain", explain.to_json()},
                {"output_dir", output_dir},
                {"ensemble_top3", ensemble_top3}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    if (j.contains("data")) c.data = DataConfig::from_json(j.at("data"));
    if (j.contains("preprocess")) c.preprocess = PreprocessConfig::from_json(j.at("preprocess"));
    if (j.contains("resample")) c.resample = ResampleSpec::from_json(j.at("resample"));
    if (j.contains("select")) c.select = SelectConfig::from_json(j.at("select"));
    if (j.contains("learners"))
        for (const auto& l : j.at("learners")) c.learners.push_back(LearnerSpec::from_json(l));
    if (j.contains("tune")) c.tune = TuneConfig::from_json(j.at("tune"));
    if (j.contains("evaluate")) c.eval = EvaluateConfig::from_json(j.at("evaluate"));
    if (j.contains("explain")) c.explain = ExplainConfig::from_json(j.at("explain"));
    c.output_dir = j.value("output_dir", std::string{"out"});
    c.ensemble_top3 = j.value("ensemble_top3", false);
    return c;
}

json LeaderboardRow::to_json() const {
    json params_j = json::object();
    for (const auto& [k, v] : params) params_j[k] = v;
    return json{{"learner", learner},
                {"tuned", tuned},
                {"params", params_j},
                {"accuracy", accuracy},
                {"precision", precision},
                {"recall", recall},
                {"f1", f1},
                {"auroc", auroc},
                {"pr_auc", pr_auc},
                {"fit_seconds", fit_seconds},
                {"predict_seconds", predict_seconds},
                {"seconds", fit_seconds + predict_seconds},
                {"critical_ratio", critical_ratio}};
}

void Leaderboard::sort_by(const std::string& column) {
    auto key = [&](const LeaderboardRow& r) -> double {
        if (column == "accuracy") return r.accuracy;
        if (column == "precision") return r.precision;
        if (column == "recall") return r.recall;
        if (column == "f1") return r.f1;
        if (column == "auroc") return r.auroc;
        if (column == "pr_auc") return r.pr_auc;
        if (column == "critical_ratio") return r.critical_ratio;
        if (column == "seconds") return r.fit_seconds + r.predict_seconds;
        if (column == "fit_seconds") return r.fit_seconds;
        if (column == "predict_seconds") return r.predict_seconds;
        throw ConfigError("unknown leaderboard column '" + column + "'");
    };
    const bool ascending = column == "seconds" || column == "fit_seconds" ||
                           column == "predict_seconds";
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
        return ascending ? key(a) < key(b) : key(a) > key(b);
    });
}

json Leaderboard::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) rows_j.push_back(r.to_json());
    json failures_j = json::array();
    for (const auto& f : failures)
        failures_j.push_back(json{{"learner", f.learner}, {"tuned", f.tuned}, {"message", f.message}});
    return json{{"rows", rows_j}, {"failures", failures_j}};
}

std::string Leaderboard::to_csv() const {
    std::ostringstream out;
    out << "learner,tuned,accuracy,precision,recall,f1,auroc,pr_auc,seconds,critical_ratio\n";
    out.precision(17);
    for (const auto& r : rows) {
        out << r.learner << ',' << (r.tuned ? "yes" : "no") << ',' << r.accuracy << ','
            << r.precision << ',' << r.recall << ',' << r.f1 << ',' << r.auroc << ','
            << r.pr_auc << ',' << (r.fit_seconds + r.predict_seconds) << ','
            << r.critical_ratio << '\n';
    }
    return out.str();
}

json ModelArtifact::to_json() const {
    json features_j = json::array();
    for (const auto& [name, kind] : feature_columns)
        features_j.push_back(json{{"name", name}, {"kind", to_string(kind)}});
    return json{{"format_version", format_version},
                {"config", config.to_json()},
                {"pipeline", trained_pipeline_to_json(pipeline)},
                {"report", report.to_json()},
                {"created", created},
                {"feature_columns", features_j},
                {"target_name", target_name},
                {"label_names", json::array({label_names[0], label_names[1]})}};
}

ModelArtifact ModelArtifact::from_json(const json& j) {
    ModelArtifact a;
    a.format_version = j.at("format_version").get<int>();
    a.config = PipelineConfig::from_json(j.at("config"));
    a.pipeline = trained_pipeline_from_json(j.at("pipeline"));
    a.report = EvalReport::from_json(j.at("report"));
    a.created = j.value("created", std::string{});
    for (const auto& f : j.at("feature_columns"))
        a.feature_columns.emplace_back(f.at("name").get<std::string>(),
                                       column_kind_from_string(f.at("kind").get<std::string>()));
    a.target_name = j.value("target_name", std::string{});
    if (j.contains("label_names")) {
        a.label_names[0] = j.at("label_names").at(0).get<std::string>();
        a.label_names[1] = j.at("label_names").at(1).get<std::string>();
    }
    return a;
}

json trained_pipeline_to_json(const TrainedPipeline& tp) {
    json j;
    j["prep"] = tp.prep.to_json();
    j["has_imputer"] = tp.has_imputer;
    if (tp.has_imputer) j["imputer"] = tp.imputer.to_json();
    switch (tp.prep.encoder) {
        case PreprocessConfig::Encoder::loo: j["loo"] = tp.loo.to_json(); break;
        case PreprocessConfig::Encoder::one_hot: j["one_hot"] = tp.one_hot.to_json(); break;
        case PreprocessConfig::Encoder::none: break;
    }
    j["has_scaler"] = tp.has_scaler;
    if (tp.has_scaler) j["scaler"] = tp.scaler.to_json();
    j["has_selection"] = tp.has_selection;
    if (tp.has_selection) j["selection"] = tp.selection.to_json();
    j["model"] = tp.model.to_json();
    return j;
}

TrainedPipeline trained_pipeline_from_json(const json& j) {
    TrainedPipeline tp;
    tp.prep = PreprocessConfig::from_json(j.at("prep"));
    tp.has_imputer = j.at("has_imputer").get<bool>();
    if (tp.has_imputer) tp.imputer = Imputer::from_json(j.at("imputer"));
    switch (tp.prep.encoder) {
        case PreprocessConfig::Encoder::loo: tp.loo = LooEncoder::from_json(j.at("loo")); break;
        case PreprocessConfig::Encoder::one_hot:
            tp.one_hot = OneHotEncoder::from_json(j.at("one_hot"));
            break;
        case PreprocessConfig::Encoder::none: break;
    }
    tp.has_scaler = j.at("has_scaler").get<bool>();
    if (tp.has_scaler) tp.scaler = Scaler::from_json(j.at("scaler"));
    tp.has_selection = j.at("has_selection").get<bool>();
    if (tp.has_selection) tp.selection = SelectionResult::from_json(j.at("selection"));
    tp.model = FittedModel::from_json(j.at("model"));
    return tp;
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[std::size_t(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace

void save_artifact(const ModelArtifact& artifact, const std::string& path) {
    const std::string payload = artifact.to_json().dump();
    json envelope{{"format_version", artifact.format_version},
                  {"checksum", hex64(fnv1a64(payload))},
                  {"payload", json::parse(payload)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write artifact file '" + path + "'");
    out << envelope.dump(2) << '\n';
    if (!out) throw DataError("failed writing artifact file '" + path + "'");
}

ModelArtifact load_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open artifact file '" + path + "'");
    json envelope;
    try {
        in >> envelope;
    } catch (const json::exception& e) {
        throw DataError("artifact file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!envelope.contains("format_version") || !envelope.contains("checksum") ||
        !envelope.contains("payload"))
        throw DataError("artifact file '" + path + "' is missing required fields");
    const int version = envelope.at("format_version").get<int>();
    if (version != ModelArtifact::kFormatVersion)
        throw ConfigError("unsupported artifact format version " + std::to_string(version) +
                          " (expected " + std::to_string(ModelArtifact::kFormatVersion) + ")");
    const std::string payload = envelope.at("payload").dump();
    if (hex64(fnv1a64(payload)) != envelope.at("checksum").get<std::string>())
        throw DataError("artifact checksum mismatch; the file is corrupted");
    return ModelArtifact::from_json(envelope.at("payload"));
}

namespace {

// Pooled held-out scores across all folds, for curve plotting.
void pooled_cv_scores(const CvDetail& detail, const Table& table, std::vector<int>& y_out,
                      std::vector<double>& scores_out) {
    y_out.clear();
    scores_out.clear();
    for (std::size_t f = 0; f < detail.folds.size(); ++f) {
        const Table held = table.select_rows(detail.folds[f]);
        const std::vector<double> scores = pipeline_scores(detail.fold_pipelines[f], held);
        const std::vector<double> y = held.target_values();
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (std::isnan(y[i])) continue;
            y_out.push_back(int(y[i]));
            scores_out.push_back(scores[i]);
        }
    }
}

struct Candidate {
    LearnerSpec spec;
    bool tuned = false;
    std::map<std::string, double> params;  // tuned overlay, for the row
};

LearnerSpec overlay(const LearnerSpec& base, const std::map<std::string, double>& params) {
    LearnerSpec s = base;
    for (const auto& [k, v] : params) s.params[k] = v;
    return s;
}

double row_objective(const LeaderboardRow& row, TuneLoss loss) {
    switch (loss) {
        case TuneLoss::one_minus_auroc: return row.auroc;
        case TuneLoss::one_minus_accuracy: return row.accuracy;
        case TuneLoss::one_minus_precision: return row.precision;
    }
    return row.auroc;
}

std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

LeaderboardRow make_row(const std::string& name, bool tuned,
                        const std::map<std::string, double>& params, const EvalReport& report,
                        const CvDetail& detail, const Table& train) {
    LeaderboardRow row;
    row.learner = name;
    row.tuned = tuned;
    row.params = params;
    row.accuracy = report.mean_accuracy;
    row.precision = report.mean_precision;
    row.recall = report.mean_recall;
    row.f1 = report.mean_f1;
    row.auroc = report.mean_auroc;
    row.pr_auc = report.mean_pr_auc;
    row.fit_seconds = report.mean_fit_seconds;
    row.predict_seconds = report.mean_predict_seconds;
    row.critical_ratio = report.critical_ratio;
    std::vector<int> y;
    std::vector<double> scores;
    pooled_cv_scores(detail, train, y, scores);
    row.roc = roc_auc(y, scores).first;
    row.pr = pr_auc(y, scores).first;
    return row;
}

// Soft-vote over the top rows' fold pipelines; folds are identical across
// members because every learner ran under the same protocol seed.
void add_ensemble_row(Leaderboard& board, const std::vector<CvDetail>& details,
                      const std::vector<std::size_t>& member_rows, const Table& train,
                      double threshold) {
    const CvDetail& first = details[member_rows.front()];
    const std::size_t k = first.folds.size();
    std::vector<FoldResult> folds(k);
    std::vector<int> pooled_y;
    std::vector<double> pooled_scores;
    for (std::size_t f = 0; f < k; ++f) {
        const Table held = train.select_rows(first.folds[f]);
        const std::vector<double> y_raw = held.target_values();
        std::vector<double> mean_scores(held.n_rows, 0.0);
        double fit_s = 0, predict_s = 0;
        for (std::size_t m : member_rows) {
            const std::vector<double> s = pipeline_scores(details[m].fold_pipelines[f], held);
            for (std::size_t i = 0; i < s.size(); ++i) mean_scores[i] += s[i];
            fit_s += details[m].report.folds[f].fit_seconds;
            predict_s += details[m].report.folds[f].predict_seconds;
        }
        std::vector<int> y;
        std::vector<double> scores;
        std::vector<int> pred;
        for (std::size_t i = 0; i < held.n_rows; ++i) {
            if (std::isnan(y_raw[i])) continue;
            const double s = mean_scores[i] / double(member_rows.size());
            y.push_back(int(y_raw[i]));
            scores.push_back(s);
            pred.push_back(s >= threshold ? 1 : 0);
            pooled_y.push_back(int(y_raw[i]));
            pooled_scores.push_back(s);
        }
        FoldResult r;
        r.cm = confusion(y, pred);
        r.accuracy = accuracy(r.cm);
        r.precision = precision(r.cm, &r.precision_defined);
        r.recall = recall(r.cm, &r.recall_defined);
        r.f1 = f1(r.cm, &r.f1_defined);
        r.auroc = roc_auc(y, scores).second;
        r.pr_auc = pr_auc(y, scores).second;
        r.fit_seconds = fit_s;
        r.predict_seconds = predict_s;
        folds[f] = r;
    }
    const EvalReport report = summarize_folds(folds);
    LeaderboardRow row;
    row.learner = "ensemble_top3";
    row.accuracy = report.mean_accuracy;
    row.precision = report.mean_precision;
    row.recall = report.mean_recall;
    row.f1 = report.mean_f1;
    row.auroc = report.mean_auroc;
    row.pr_auc = report.mean_pr_auc;
    row.fit_seconds = report.mean_fit_seconds;
    row.predict_seconds = report.mean_predict_seconds;
    row.critical_ratio = report.critical_ratio;
    row.roc = roc_auc(pooled_y, pooled_scores).first;
    row.pr = pr_auc(pooled_y, pooled_scores).first;
    board.rows.push_back(std::move(row));
}

}  // namespace

RunResult run_automl(const PipelineConfig& config, const Table& table) {
    config.validate();
    if (!table.has_target()) throw DataError("the training table has no target column");

    Table train = table;
    Table holdout;
    bool has_holdout = false;
    if (config.data.train_fraction < 1.0) {
        auto parts = split_train_test(table, config.data.train_fraction, true, config.data.seed);
        train = std::move(parts.first);
        holdout = std::move(parts.second);
        has_holdout = true;
    }

    const std::uint64_t protocol_seed = config.data.seed;
    const bool tuning = config.tune.method != "none";

    // Candidate list: per learner an untuned entry, plus a tuned one when
    // tuning is on. Tuning itself runs inside the candidate evaluation.
    struct Outcome {
        bool ok = false;
        LeaderboardRow row;
        CvDetail detail;
        LearnerSpec spec;
        std::string error;
    };
    std::vector<Candidate> candidates;
    for (const auto& learner : config.learners) {
        candidates.push_back({learner, false, {}});
        if (tuning) candidates.push_back({learner, true, {}});
    }

    std::vector<Outcome> outcomes(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t ci) {
        Outcome& out = outcomes[ci];
        const Candidate& cand = candidates[ci];
        const std::string name = to_string(cand.spec.kind);
        try {
            LearnerSpec spec = cand.spec;
            std::map<std::string, double> best_params;
            if (cand.tuned) {
                const std::size_t learner_index = ci / 2;
                Objective objective;
                objective.learner = cand.spec;
                objective.loss = config.tune.loss;
                objective.k_folds = 3;
                objective.seed = config.data.seed + 1000 + learner_index;
                objective.prep = config.preprocess;
                objective.resample = config.resample;
                objective.select = config.select;
                const ParamSpace space = default_space(cand.spec.kind);
                TuningResult tuned;
                if (space.dims.empty() || config.tune.method == "grid") {
                    tuned = grid_search(objective, space, train);
                } else if (config.tune.method == "random") {
                    tuned = random_search(objective, space, config.tune.budget, objective.seed,
                                          train);
                } else {
                    const std::size_t n_init =
                        std::max<std::size_t>(1, std::min<std::size_t>(5, config.tune.budget - 1));
                    tuned = bayes_search(objective, space, config.tune.budget, n_init,
                                         objective.seed, train);
                }
                best_params = tuned.best_params;
                spec = overlay(cand.spec, best_params);
            }
            CvDetail detail =
                cross_validate_detailed(spec, train, config.eval.k_folds, config.preprocess,
                                        config.resample, config.select, protocol_seed,
                                        config.eval.threshold);
            out.row = make_row(name, cand.tuned, best_params, detail.report, detail, train);
            out.detail = std::move(detail);
            out.spec = spec;
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });

    RunResult result;
    std::vector<CvDetail> details;
    std::vector<LearnerSpec> specs;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        if (outcomes[ci].ok) {
            result.leaderboard.rows.push_back(std::move(outcomes[ci].row));
            details.push_back(std::move(outcomes[ci].detail));
            specs.push_back(outcomes[ci].spec);
        } else {
            result.leaderboard.failures.push_back({to_string(candidates[ci].spec.kind),
                                                   candidates[ci].tuned, outcomes[ci].error});
        }
    }
    if (result.leaderboard.rows.empty()) {
        std::string detail_msg;
        for (const auto& f : result.leaderboard.failures)
            detail_msg += "\n  " + f.learner + (f.tuned ? " (tuned)" : "") + ": " + f.message;
        throw DataError("every learner failed:" + detail_msg);
    }

    // Winner among single-learner rows, by the configured loss; ties keep the
    // earliest candidate.
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.leaderboard.rows.size(); ++i) {
        if (row_objective(result.leaderboard.rows[i], config.tune.loss) >
            row_objective(result.leaderboard.rows[best], config.tune.loss))
            best = i;
    }

    if (config.ensemble_top3 && result.leaderboard.rows.size() >= 3) {
        std::vector<std::size_t> order(result.leaderboard.rows.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return result.leaderboard.rows[a].auroc > result.leaderboard.rows[b].auroc;
        });
        order.resize(3);
        add_ensemble_row(result.leaderboard, details, order, train, config.eval.threshold);
    }

    // Package the winner: refit every stage on the full training split.
    ModelArtifact artifact;
    artifact.config = config;
    artifact.pipeline = train_pipeline(train, config.preprocess, config.resample, config.select,
                                       specs[best]);
    artifact.report = details[best].report;
    artifact.created = timestamp_utc();
    for (std::size_t j : train.feature_indices())
        artifact.feature_columns.emplace_back(train.columns[j].name, train.columns[j].kind);
    artifact.target_name = train.columns[*train.target_index].name;
    artifact.label_names = train.label_names;
    result.artifact = std::move(artifact);

    // Explain the refit winner on the transformed training split.
    const Table transformed = pipeline_transform(result.artifact.pipeline, train);
    for (std::size_t j : transformed.feature_indices())
        result.explained_features.push_back(transformed.columns[j].name);
    const Matrix all = feature_matrix(transformed);
    std::vector<std::size_t> idx(all.rows);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(config.data.seed);
    rng.shuffle(idx);
    const std::size_t n_bg = std::min(config.explain.background_size, all.rows);
    const std::size_t n_sample = std::min(config.explain.sample_size, all.rows);
    Matrix background(n_bg, all.cols);
    for (std::size_t i = 0; i < n_bg; ++i)
        for (std::size_t j = 0; j < all.cols; ++j) background(i, j) = all(idx[i], j);
    Matrix sample(n_sample, all.cols);
    for (std::size_t i = 0; i < n_sample; ++i) {
        const std::size_t src = idx[(n_bg + i) % idx.size()];
        for (std::size_t j = 0; j < all.cols; ++j) sample(i, j) = all(src, j);
    }
    result.importance = global_importance(result.artifact.pipeline.model, sample, background,
                                          config.explain.method, 2048, config.data.seed);

    if (has_holdout) {
        result.has_holdout = true;
        result.holdout = evaluate_artifact(result.artifact, holdout);
    }
    return result;
}

RunResult run_automl(const PipelineConfig& config) {
    if (config.data.path.empty()) throw ConfigError("config names no data path");
    if (config.data.target.empty()) throw ConfigError("config names no target column");
    const Table table = load_csv(config.data.path, config.data.schema, config.data.target);
    return run_automl(config, table);
}

Table assemble_features(const ModelArtifact& artifact, const Table& raw) {
    Table assembled;
    assembled.n_rows = raw.n_rows;
    assembled.label_names = artifact.label_names;
    for (const auto& [name, kind] : artifact.feature_columns) {
        if (!raw.has_column(name)) throw DataError("required column '" + name + "' is missing");
        const Column& col = raw.columns[raw.column_index(name)];
        if (col.kind != kind)
            throw DataError("column '" + name + "' is " + to_string(col.kind) +
                            " but the model was trained on " + to_string(kind) + " values");
        assembled.columns.push_back(col);
    }
    assembled.check_consistent();
    return assembled;
}

std::pair<std::vector<int>, std::vector<double>> predict_batch(const ModelArtifact& artifact,
                                                               const Table& raw) {
    const Table assembled = assemble_features(artifact, raw);
    const std::vector<double> scores = pipeline_scores(artifact.pipeline, assembled);
    std::vector<int> preds(scores.size());
    const double threshold = artifact.config.eval.threshold;
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= threshold ? 1 : 0;
    return {std::move(preds), scores};
}

EvalReport evaluate_artifact(const ModelArtifact& artifact, const Table& data) {
    if (!data.has_target()) throw DataError("evaluation data has no target column");
    auto [preds, scores] = predict_batch(artifact, data);
    const std::vector<double> y_raw = data.target_values();
    std::vector<int> y;
    std::vector<int> pred;
    std::vector<double> kept_scores;
    for (std::size_t i = 0; i < y_raw.size(); ++i) {
        if (std::isnan(y_raw[i])) continue;
        y.push_back(int(y_raw[i]));
        pred.push_back(preds[i]);
        kept_scores.push_back(scores[i]);
    }
    if (y.empty()) throw DataError("evaluation data has no labeled rows");
    FoldResult r;
    Stopwatch watch;
    r.cm = confusion(y, pred);
    r.accuracy = accuracy(r.cm);
    r.precision = precision(r.cm, &r.precision_defined);
    r.recall = recall(r.cm, &r.recall_defined);
    r.f1 = f1(r.cm, &r.f1_defined);
    r.auroc = roc_auc(y, kept_scores).second;
    r.pr_auc = pr_auc(y, kept_scores).second;
    r.fit_seconds = artifact.pipeline.model.fit_seconds;
    r.predict_seconds = watch.seconds();
    return summarize_folds({r});
}

namespace {

std::string slug(const LeaderboardRow& row) {
    return row.learner + (row.tuned ? "_tuned" : "");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report file '" + path.string() + "'");
    out << content;
}

std::string roc_overlay_svg(const Leaderboard& board) {
    constexpr int kSize = 440, kMargin = 40, kPlot = kSize - 2 * kMargin;
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    constexpr std::size_t kPaletteSize = sizeof palette / sizeof palette[0];
    auto px = [&](double v) { return double(kMargin) + v * kPlot; };
    auto py = [&](double v) { return double(kSize - kMargin) - v * kPlot; };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 220 << "\" height=\""
        << kSize << "\" viewBox=\"0 0 " << kSize + 220 << ' ' << kSize << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPlot
        << "\" height=\"" << kPlot << "\" fill=\"none\" stroke=\"#999\"/>\n"
        << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">ROC curves</text>\n"
        << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
        << py(1) << "\" stroke=\"#ccc\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t i = 0; i < board.rows.size(); ++i) {
        const auto& row = board.rows[i];
        const char* color = palette[i % kPaletteSize];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t p = 0; p < row.roc.x.size(); ++p) {
            if (p) svg << ' ';
            svg << px(row.roc.x[p]) << ',' << py(row.roc.y[p]);
        }
        svg << "\"/>\n";
        const double ly = double(kMargin) + 16.0 * double(i);
        svg << "<rect x=\"" << kSize + 10 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\""
            << color << "\"/>\n"
            << "<text x=\"" << kSize + 28 << "\" y=\"" << ly + 10 << "\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << slug(row) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string critical_ratio_svg(const Leaderboard& board) {
    constexpr int kWidth = 640, kBarH = 22, kGap = 6, kMargin = 40, kLabelW = 220;
    const int height = kMargin * 2 + int(board.rows.size()) * (kBarH + kGap);
    double max_ratio = 0;
    for (const auto& r : board.rows) max_ratio = std::max(max_ratio, r.critical_ratio);
    if (max_ratio <= 0) max_ratio = 1;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << kWidth << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">Critical ratio (accuracy per second)</text>\n";
    for (std::size_t i = 0; i < board.rows.size(); ++i) {
        const auto& row = board.rows[i];
        const double y = kMargin + double(i) * (kBarH + kGap);
        const double w = (kWidth - kLabelW - kMargin) * (row.critical_ratio / max_ratio);
        svg << "<text x=\"" << kLabelW - 8 << "\" y=\"" << y + kBarH - 6
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << slug(row)
            << "</text>\n"
            << "<rect x=\"" << kLabelW << "\" y=\"" << y << "\" width=\"" << std::max(w, 1.0)
            << "\" height=\"" << kBarH << "\" fill=\"#1f77b4\"/>\n"
            << "<text x=\"" << kLabelW + std::max(w, 1.0) + 6 << "\" y=\"" << y + kBarH - 6
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << row.critical_ratio
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

void emit_reports(const Leaderboard& leaderboard, const std::map<std::string, json>& extra,
                  const std::string& out_dir) {
    if (leaderboard.rows.empty()) throw DataError("cannot report an empty leaderboard");
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "leaderboard.csv", leaderboard.to_csv());
    write_file(dir / "leaderboard.json", leaderboard.to_json().dump(2) + "\n");
    for (const auto& row : leaderboard.rows) {
        write_file(dir / ("roc_" + slug(row) + ".csv"), curve_to_csv(row.roc));
        write_file(dir / ("pr_" + slug(row) + ".csv"), curve_to_csv(row.pr));
    }
    write_file(dir / "roc_overlay.svg", roc_overlay_svg(leaderboard));
    write_file(dir / "critical_ratio.svg", critical_ratio_svg(leaderboard));
    for (const auto& [name, doc] : extra) write_file(dir / (name + ".json"), doc.dump(2) + "\n");
}

}  // namespace scml
