#include "scml/evaluate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "scml/parallel.hpp"

namespace scml {

using nlohmann::json;

json ConfusionMatrix::to_json() const {
    return json{{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}};
}

ConfusionMatrix ConfusionMatrix::from_json(const json& j) {
    ConfusionMatrix cm;
    cm.tp = j.at("tp").get<std::size_t>();
    cm.fp = j.at("fp").get<std::size_t>();
    cm.tn = j.at("tn").get<std::size_t>();
    cm.fn = j.at("fn").get<std::size_t>();
    return cm;
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw DataError("confusion: y_true has " + std::to_string(y_true.size()) +
                        " entries but y_pred has " + std::to_string(y_pred.size()));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1))
            throw DataError("confusion: labels must be 0 or 1");
        if (t == 1)
            (p == 1 ? cm.tp : cm.fn)++;
        else
            (p == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    const std::size_t n = cm.total();
    if (n == 0) throw DataError("accuracy of an empty confusion matrix");
    return double(cm.tp + cm.tn) / double(n);
}

namespace {

double safe_ratio(double num, double den, bool* defined) {
    if (defined) *defined = den > 0;
    return den > 0 ? num / den : 0.0;
}

}  // namespace

double precision(const ConfusionMatrix& cm, bool* defined) {
    return safe_ratio(double(cm.tp), double(cm.tp + cm.fp), defined);
}

double recall(const ConfusionMatrix& cm, bool* defined) {
    return safe_ratio(double(cm.tp), double(cm.tp + cm.fn), defined);
}

double f1(const ConfusionMatrix& cm, bool* defined) {
    bool pd = false, rd = false;
    const double p = precision(cm, &pd);
    const double r = recall(cm, &rd);
    if (!pd || !rd || p + r == 0) {
        if (defined) *defined = false;
        return 0.0;
    }
    if (defined) *defined = true;
    return 2 * p * r / (p + r);
}

json CurvePoints::to_json() const {
    return json{{"x", x}, {"y", y}, {"thresholds", thresholds}};
}

std::string curve_to_csv(const CurvePoints& curve) {
    std::string out = "threshold,x,y\n";
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        out += format_double(curve.thresholds[i]);
        out += ',';
        out += format_double(curve.x[i]);
        out += ',';
        out += format_double(curve.y[i]);
        out += '\n';
    }
    return out;
}

std::string curve_to_svg(const CurvePoints& curve, const std::string& title) {
    constexpr int kSize = 440, kMargin = 40, kPlot = kSize - 2 * kMargin;
    auto px = [&](double v) { return double(kMargin) + v * kPlot; };
    auto py = [&](double v) { return double(kSize - kMargin) - v * kPlot; };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\""
        << kSize << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPlot
        << "\" height=\"" << kPlot << "\" fill=\"none\" stroke=\"#999\"/>\n"
        << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
        << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        if (i) svg << ' ';
        svg << px(curve.x[i]) << ',' << py(curve.y[i]);
    }
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

namespace {

struct Sweep {
    CurvePoints curve;        // one point per distinct score group
    std::vector<double> tps;  // cumulative counts per group
    std::vector<double> fps;
    double n_pos = 0, n_neg = 0;
};

// Descending-score sweep; each distinct score contributes one cut point after
// all rows sharing it are admitted.
Sweep sweep_scores(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size())
        throw DataError("scores and labels differ in length");
    if (y_true.empty()) throw DataError("cannot sweep an empty score vector");
    Sweep s;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != 0 && y_true[i] != 1) throw DataError("labels must be 0 or 1");
        if (!std::isfinite(scores[i])) throw DataError("scores must be finite");
        (y_true[i] == 1 ? s.n_pos : s.n_neg) += 1;
    }
    std::vector<std::size_t> order(y_true.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    double tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double cut = scores[order[i]];
        while (i < order.size() && scores[order[i]] == cut) {
            (y_true[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        s.tps.push_back(tp);
        s.fps.push_back(fp);
        s.curve.thresholds.push_back(cut);
    }
    return s;
}

}  // namespace

std::pair<CurvePoints, double> roc_auc(const std::vector<int>& y_true,
                                       const std::vector<double>& scores) {
    Sweep s = sweep_scores(y_true, scores);
    if (s.n_pos == 0 || s.n_neg == 0)
        throw DataError("roc_auc needs both classes in y_true");
    CurvePoints curve;
    curve.x.push_back(0);
    curve.y.push_back(0);
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    double auc = 0, prev_x = 0, prev_y = 0;
    for (std::size_t g = 0; g < s.tps.size(); ++g) {
        const double x = s.fps[g] / s.n_neg;
        const double y = s.tps[g] / s.n_pos;
        auc += (x - prev_x) * (y + prev_y) / 2;
        curve.x.push_back(x);
        curve.y.push_back(y);
        curve.thresholds.push_back(s.curve.thresholds[g]);
        prev_x = x;
        prev_y = y;
    }
    return {curve, auc};
}

std::pair<CurvePoints, double> pr_auc(const std::vector<int>& y_true,
                                      const std::vector<double>& scores) {
    Sweep s = sweep_scores(y_true, scores);
    if (s.n_pos == 0) throw DataError("pr_auc needs at least one positive in y_true");
    CurvePoints curve;
    curve.x.push_back(0);
    curve.y.push_back(1);
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    double ap = 0, prev_recall = 0;
    for (std::size_t g = 0; g < s.tps.size(); ++g) {
        const double rec = s.tps[g] / s.n_pos;
        const double prec = s.tps[g] / (s.tps[g] + s.fps[g]);
        ap += (rec - prev_recall) * prec;
        curve.x.push_back(rec);
        curve.y.push_back(prec);
        curve.thresholds.push_back(s.curve.thresholds[g]);
        prev_recall = rec;
    }
    return {curve, ap};
}

double critical_ratio(double overall_accuracy, double elapsed_seconds) {
    if (!(elapsed_seconds > 0))
        throw ConfigError("critical_ratio requires elapsed_seconds > 0");
    return overall_accuracy / elapsed_seconds;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Table& table, std::size_t k,
                                                       std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified k-fold needs k >= 2");
    if (!table.has_target()) throw DataError("k-fold stratification needs a target column");
    const auto classes = table.class_row_indices();
    const std::size_t minority = std::min(classes[0].size(), classes[1].size());
    if (k > minority)
        throw DataError("k=" + std::to_string(k) + " exceeds the minority class count " +
                        std::to_string(minority));
    // Rows without a label form a third stratum so they still partition evenly.
    std::vector<std::size_t> unlabeled;
    const auto y = table.target_values();
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::isnan(y[i])) unlabeled.push_back(i);

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    auto deal = [&](std::vector<std::size_t> stratum) {
        rng.shuffle(stratum);
        for (std::size_t i = 0; i < stratum.size(); ++i) folds[i % k].push_back(stratum[i]);
    };
    deal(classes[0]);
    deal(classes[1]);
    deal(std::move(unlabeled));
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

json PreprocessConfig::to_json() const {
    const char* enc = encoder == Encoder::loo ? "loo" : encoder == Encoder::one_hot ? "one_hot" : "none";
    return json{{"encoder", enc},
                {"impute", impute},
                {"scale", scale},
                {"loo_smoothing", loo_smoothing},
                {"one_hot_max_cardinality", one_hot_max_cardinality}};
}

PreprocessConfig PreprocessConfig::from_json(const json& j) {
    PreprocessConfig c;
    if (j.contains("encoder")) {
        const std::string enc = j.at("encoder").get<std::string>();
        if (enc == "loo")
            c.encoder = Encoder::loo;
        else if (enc == "one_hot")
            c.encoder = Encoder::one_hot;
        else if (enc == "none")
            c.encoder = Encoder::none;
        else
            throw ConfigError("unknown encoder '" + enc + "'");
    }
    c.impute = j.value("impute", c.impute);
    c.scale = j.value("scale", c.scale);
    c.loo_smoothing = j.value("loo_smoothing", c.loo_smoothing);
    c.one_hot_max_cardinality = j.value("one_hot_max_cardinality", c.one_hot_max_cardinality);
    return c;
}

json SelectConfig::to_json() const {
    return json{{"enabled", enabled}, {"method", to_string(method)},   {"top_k", top_k},
                {"lambda", lambda},   {"lasso_tol", lasso_tol},        {"lasso_max_iter", lasso_max_iter}};
}

SelectConfig SelectConfig::from_json(const json& j) {
    SelectConfig c;
    c.enabled = j.value("enabled", c.enabled);
    if (j.contains("method")) c.method = select_method_from_string(j.at("method").get<std::string>());
    c.top_k = j.value("top_k", c.top_k);
    c.lambda = j.value("lambda", c.lambda);
    c.lasso_tol = j.value("lasso_tol", c.lasso_tol);
    c.lasso_max_iter = j.value("lasso_max_iter", c.lasso_max_iter);
    return c;
}

namespace {

// Feature matrix plus labels restricted to rows whose label is known.
void labeled_xy(const Table& table, Matrix& x, std::vector<double>& y) {
    const auto all_y = table.target_values();
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < all_y.size(); ++i)
        if (!std::isnan(all_y[i])) rows.push_back(i);
    if (rows.empty()) throw DataError("no labeled rows to fit on");
    const Matrix full = feature_matrix(table);
    x = Matrix(rows.size(), full.cols);
    y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(full.row_ptr(rows[i]), full.row_ptr(rows[i]) + full.cols, &x(i, 0));
        y[i] = all_y[rows[i]];
    }
}

SelectionResult run_selection(const Table& table, const SelectConfig& cfg, std::uint64_t seed) {
    Matrix x;
    std::vector<double> y;
    labeled_xy(table, x, y);
    switch (cfg.method) {
        case SelectMethod::pearson:
            return pearson_filter(x, y, cfg.top_k);
        case SelectMethod::chi2:
            return chi2_filter(x, y, cfg.top_k);
        case SelectMethod::lasso: {
            const double lambda =
                cfg.lambda >= 0 ? cfg.lambda : choose_lasso_lambda(x, y, seed);
            return lasso_fit(x, y, lambda, cfg.lasso_tol, cfg.lasso_max_iter);
        }
    }
    throw ConfigError("unknown selection method");
}

}  // namespace

double choose_lasso_lambda(const Matrix& x, const std::vector<double>& y, std::uint64_t seed) {
    const double lambda_max = lasso_lambda_max(x, y);
    if (lambda_max <= 0) return 0;
    constexpr std::size_t kGrid = 5, kFolds = 3;
    std::vector<double> grid(kGrid);
    for (std::size_t g = 0; g < kGrid; ++g)
        grid[g] = lambda_max * std::pow(10.0, -3.0 * (double(kGrid - 1 - g) / double(kGrid - 1)));
    // grid is ascending; evaluate descending so ties keep the sparser lambda.
    std::reverse(grid.begin(), grid.end());

    std::array<std::vector<std::size_t>, 2> classes;
    for (std::size_t i = 0; i < y.size(); ++i) classes[y[i] == 1.0 ? 1 : 0].push_back(i);
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(kFolds);
    for (auto& cls : classes) {
        rng.shuffle(cls);
        for (std::size_t i = 0; i < cls.size(); ++i) folds[i % kFolds].push_back(cls[i]);
    }

    double best_lambda = grid.front(), best_score = -1;
    for (double lambda : grid) {
        double score_sum = 0;
        std::size_t scored = 0;
        for (std::size_t f = 0; f < kFolds; ++f) {
            std::vector<std::size_t> train_rows;
            for (std::size_t g = 0; g < kFolds; ++g)
                if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
            if (train_rows.empty() || folds[f].empty()) continue;
            Matrix xt(train_rows.size(), x.cols);
            std::vector<double> yt(train_rows.size());
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                std::copy(x.row_ptr(train_rows[i]), x.row_ptr(train_rows[i]) + x.cols, &xt(i, 0));
                yt[i] = y[train_rows[i]];
            }
            const SelectionResult sel = lasso_fit(xt, yt, lambda);
            double fold_score = 0.5;  // an empty support carries no signal
            if (!sel.support.empty()) {
                Matrix xs(xt.rows, sel.support.size());
                for (std::size_t i = 0; i < xt.rows; ++i)
                    for (std::size_t j = 0; j < sel.support.size(); ++j)
                        xs(i, j) = xt(i, sel.support[j]);
                LearnerSpec probe;
                probe.kind = LearnerKind::logistic_regression;
                probe.seed = seed;
                const FittedModel m = fit(probe, xs, yt);
                std::vector<int> yv;
                std::vector<double> sv;
                for (std::size_t row : folds[f]) {
                    yv.push_back(int(y[row]));
                    std::vector<double> xr(sel.support.size());
                    for (std::size_t j = 0; j < sel.support.size(); ++j)
                        xr[j] = x(row, sel.support[j]);
                    sv.push_back(m.model->score(xr.data(), xr.size()));
                }
                const bool has_pos = std::find(yv.begin(), yv.end(), 1) != yv.end();
                const bool has_neg = std::find(yv.begin(), yv.end(), 0) != yv.end();
                if (has_pos && has_neg) fold_score = roc_auc(yv, sv).second;
            }
            score_sum += fold_score;
            ++scored;
        }
        const double score = scored ? score_sum / double(scored) : 0.5;
        if (score > best_score + 1e-12) {
            best_score = score;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

TrainedPipeline train_pipeline(const Table& train, const PreprocessConfig& prep,
                               const ResampleSpec& resample_spec, const SelectConfig& select,
                               const LearnerSpec& learner) {
    if (!train.has_target()) throw DataError("training table has no target column");
    TrainedPipeline tp;
    tp.prep = prep;

    Table staged = train;
    if (prep.impute) {
        tp.has_imputer = true;
        tp.imputer = fit_impute(staged);
        staged = apply_impute(tp.imputer, staged);
    }
    switch (prep.encoder) {
        case PreprocessConfig::Encoder::loo:
            tp.loo = fit_loo(staged, prep.loo_smoothing);
            staged = transform_loo(tp.loo, staged, LooMode::fit_rows);
            break;
        case PreprocessConfig::Encoder::one_hot:
            tp.one_hot = fit_one_hot(staged, prep.one_hot_max_cardinality);
            staged = transform_one_hot(tp.one_hot, staged);
            break;
        case PreprocessConfig::Encoder::none:
            break;
    }
    if (prep.scale) {
        tp.has_scaler = true;
        tp.scaler = fit_scale(staged);
        staged = apply_scale(tp.scaler, staged);
    }
    staged = resample(staged, resample_spec);
    if (select.enabled) {
        tp.has_selection = true;
        tp.selection = run_selection(staged, select, learner.seed);
        staged = apply_selection(tp.selection, staged);
    }
    const Matrix x = feature_matrix(staged);
    tp.model = fit(learner, x, staged.target_values());
    return tp;
}

Table pipeline_transform(const TrainedPipeline& tp, const Table& raw) {
    Table staged = raw;
    if (tp.has_imputer) staged = apply_impute(tp.imputer, staged);
    switch (tp.prep.encoder) {
        case PreprocessConfig::Encoder::loo:
            staged = transform_loo(tp.loo, staged, LooMode::new_rows);
            break;
        case PreprocessConfig::Encoder::one_hot:
            staged = transform_one_hot(tp.one_hot, staged);
            break;
        case PreprocessConfig::Encoder::none:
            break;
    }
    if (tp.has_scaler) staged = apply_scale(tp.scaler, staged);
    if (tp.has_selection) staged = apply_selection(tp.selection, staged);
    return staged;
}

std::vector<double> pipeline_scores(const TrainedPipeline& tp, const Table& raw) {
    const Table staged = pipeline_transform(tp, raw);
    const Matrix x = feature_matrix(staged);
    if (x.cols != tp.model.n_features)
        throw DataError("pipeline produced " + std::to_string(x.cols) +
                        " features but the model expects " +
                        std::to_string(tp.model.n_features));
    std::vector<double> scores(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        scores[i] = tp.model.model->score(x.row_ptr(i), x.cols);
    return scores;
}

json FoldResult::to_json() const {
    return json{{"confusion", cm.to_json()},
                {"accuracy", accuracy},
                {"precision", precision},
                {"precision_defined", precision_defined},
                {"recall", recall},
                {"recall_defined", recall_defined},
                {"f1", f1},
                {"f1_defined", f1_defined},
                {"auroc", auroc},
                {"pr_auc", pr_auc},
                {"fit_seconds", fit_seconds},
                {"predict_seconds", predict_seconds}};
}

FoldResult FoldResult::from_json(const json& j) {
    FoldResult f;
    f.cm = ConfusionMatrix::from_json(j.at("confusion"));
    f.accuracy = j.at("accuracy").get<double>();
    f.precision = j.at("precision").get<double>();
    f.precision_defined = j.at("precision_defined").get<bool>();
    f.recall = j.at("recall").get<double>();
    f.recall_defined = j.at("recall_defined").get<bool>();
    f.f1 = j.at("f1").get<double>();
    f.f1_defined = j.at("f1_defined").get<bool>();
    f.auroc = j.at("auroc").get<double>();
    f.pr_auc = j.at("pr_auc").get<double>();
    f.fit_seconds = j.at("fit_seconds").get<double>();
    f.predict_seconds = j.at("predict_seconds").get<double>();
    return f;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / double(v.size()));
}

}  // namespace

EvalReport summarize_folds(const std::vector<FoldResult>& folds) {
    if (folds.empty()) throw DataError("cannot summarize zero folds");
    EvalReport r;
    r.folds = folds;
    auto collect = [&](auto member) {
        std::vector<double> v;
        for (const auto& f : folds) v.push_back(f.*member);
        return v;
    };
    mean_std(collect(&FoldResult::accuracy), r.mean_accuracy, r.std_accuracy);
    mean_std(collect(&FoldResult::precision), r.mean_precision, r.std_precision);
    mean_std(collect(&FoldResult::recall), r.mean_recall, r.std_recall);
    mean_std(collect(&FoldResult::f1), r.mean_f1, r.std_f1);
    mean_std(collect(&FoldResult::auroc), r.mean_auroc, r.std_auroc);
    mean_std(collect(&FoldResult::pr_auc), r.mean_pr_auc, r.std_pr_auc);
    double unused;
    mean_std(collect(&FoldResult::fit_seconds), r.mean_fit_seconds, unused);
    mean_std(collect(&FoldResult::predict_seconds), r.mean_predict_seconds, unused);
    r.critical_ratio = critical_ratio(r.mean_accuracy, r.mean_fit_seconds + r.mean_predict_seconds);
    return r;
}

json EvalReport::to_json() const {
    json fold_array = json::array();
    for (const auto& f : folds) fold_array.push_back(f.to_json());
    return json{{"folds", fold_array},
                {"mean_accuracy", mean_accuracy},
                {"std_accuracy", std_accuracy},
                {"mean_precision", mean_precision},
                {"std_precision", std_precision},
                {"mean_recall", mean_recall},
                {"std_recall", std_recall},
                {"mean_f1", mean_f1},
                {"std_f1", std_f1},
                {"mean_auroc", mean_auroc},
                {"std_auroc", std_auroc},
                {"mean_pr_auc", mean_pr_auc},
                {"std_pr_auc", std_pr_auc},
                {"mean_fit_seconds", mean_fit_seconds},
                {"mean_predict_seconds", mean_predict_seconds},
                {"critical_ratio", critical_ratio}};
}

EvalReport EvalReport::from_json(const json& j) {
    EvalReport r;
    for (const auto& f : j.at("folds")) r.folds.push_back(FoldResult::from_json(f));
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.std_accuracy = j.at("std_accuracy").get<double>();
    r.mean_precision = j.at("mean_precision").get<double>();
    r.std_precision = j.at("std_precision").get<double>();
    r.mean_recall = j.at("mean_recall").get<double>();
    r.std_recall = j.at("std_recall").get<double>();
    r.mean_f1 = j.at("mean_f1").get<double>();
    r.std_f1 = j.at("std_f1").get<double>();
    r.mean_auroc = j.at("mean_auroc").get<double>();
    r.std_auroc = j.at("std_auroc").get<double>();
    r.mean_pr_auc = j.at("mean_pr_auc").get<double>();
    r.std_pr_auc = j.at("std_pr_auc").get<double>();
    r.mean_fit_seconds = j.at("mean_fit_seconds").get<double>();
    r.mean_predict_seconds = j.at("mean_predict_seconds").get<double>();
    r.critical_ratio = j.at("critical_ratio").get<double>();
    return r;
}

CvDetail cross_validate_detailed(const LearnerSpec& learner, const Table& table, std::size_t k,
                                 const PreprocessConfig& prep, const ResampleSpec& resample_spec,
                                 const SelectConfig& select, std::uint64_t seed,
                                 double threshold) {
    CvDetail detail;
    detail.folds = stratified_kfold(table, k, seed);
    std::vector<FoldResult> results(k);
    detail.fold_pipelines.resize(k);

    parallel_for(k, [&](std::size_t f) {
        std::vector<bool> held(table.n_rows, false);
        for (std::size_t row : detail.folds[f]) held[row] = true;
        std::vector<std::size_t> train_rows;
        for (std::size_t row = 0; row < table.n_rows; ++row)
            if (!held[row]) train_rows.push_back(row);
        const Table train = table.select_rows(train_rows);
        const Table eval = table.select_rows(detail.folds[f]);

        // Every seeded stage shifts by the fold index, so results do not
        // depend on evaluation order.
        ResampleSpec fold_resample = resample_spec;
        fold_resample.seed += f;
        LearnerSpec fold_learner = learner;
        fold_learner.seed += f;

        Stopwatch fit_watch;
        TrainedPipeline tp = train_pipeline(train, prep, fold_resample, select, fold_learner);
        FoldResult fr;
        fr.fit_seconds = fit_watch.seconds();

        Stopwatch predict_watch;
        const std::vector<double> scores = pipeline_scores(tp, eval);
        fr.predict_seconds = predict_watch.seconds();

        const auto y_eval = eval.target_values();
        std::vector<int> y_true, y_pred;
        std::vector<double> y_score;
        for (std::size_t i = 0; i < y_eval.size(); ++i) {
            if (std::isnan(y_eval[i])) continue;
            y_true.push_back(int(y_eval[i]));
            y_score.push_back(scores[i]);
            y_pred.push_back(scores[i] >= threshold ? 1 : 0);
        }
        fr.cm = confusion(y_true, y_pred);
        fr.accuracy = accuracy(fr.cm);
        fr.precision = precision(fr.cm, &fr.precision_defined);
        fr.recall = recall(fr.cm, &fr.recall_defined);
        fr.f1 = f1(fr.cm, &fr.f1_defined);
        fr.auroc = roc_auc(y_true, y_score).second;
        fr.pr_auc = pr_auc(y_true, y_score).second;

        results[f] = fr;
        detail.fold_pipelines[f] = std::move(tp);
    });
    detail.report = summarize_folds(results);
    return detail;
}

EvalReport cross_validate(const LearnerSpec& learner, const Table& table, std::size_t k,
                          const PreprocessConfig& prep, const ResampleSpec& resample_spec,
                          const SelectConfig& select, std::uint64_t seed, double threshold) {
    return cross_validate_detailed(learner, table, k, prep, resample_spec, select, seed, threshold)
        .report;
}

}  // namespace scml
