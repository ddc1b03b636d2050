#pragma once

#include <json.hpp>

#include "scml/learners.hpp"
#include "scml/preprocess.hpp"
#include "scml/resample.hpp"
#include "scml/select.hpp"
#include "scml/tabular.hpp"

namespace scml {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    nlohmann::json to_json() const;
    static ConfusionMatrix from_json(const nlohmann::json& j);
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

double accuracy(const ConfusionMatrix& cm);
/// tp/(tp+fp); a zero denominator yields 0 and clears *defined.
double precision(const ConfusionMatrix& cm, bool* defined = nullptr);
double recall(const ConfusionMatrix& cm, bool* defined = nullptr);
double f1(const ConfusionMatrix& cm, bool* defined = nullptr);

struct CurvePoints {
    std::vector<double> x;  // ROC: FPR, PR: recall
    std::vector<double> y;  // ROC: TPR, PR: precision
    std::vector<double> thresholds;

    nlohmann::json to_json() const;
};

std::string curve_to_csv(const CurvePoints& curve);
std::string curve_to_svg(const CurvePoints& curve, const std::string& title);

/// Descending-score threshold sweep with tied scores grouped; area by
/// trapezoidal integration (equals Mann-Whitney concordance with ties at 1/2).
std::pair<CurvePoints, double> roc_auc(const std::vector<int>& y_true,
                                       const std::vector<double>& scores);

/// Average precision: sum of (R_i - R_{i-1}) * P_i over the sweep.
std::pair<CurvePoints, double> pr_auc(const std::vector<int>& y_true,
                                      const std::vector<double>& scores);

/// Overall accuracy divided by elapsed seconds (1/s).
double critical_ratio(double overall_accuracy, double elapsed_seconds);

/// Disjoint fold index sets; per-fold class counts within 1 of proportional.
std::vector<std::vector<std::size_t>> stratified_kfold(const Table& table, std::size_t k,
                                                       std::uint64_t seed);

struct PreprocessConfig {
    enum class Encoder { loo, one_hot, none };
    Encoder encoder = Encoder::loo;
    bool impute = true;
    bool scale = true;
    double loo_smoothing = 0.0;
    std::size_t one_hot_max_cardinality = 64;

    nlohmann::json to_json() const;
    static PreprocessConfig from_json(const nlohmann::json& j);
};

struct SelectConfig {
    bool enabled = false;
    SelectMethod method = SelectMethod::lasso;
    std::size_t top_k = 0;           // pearson / chi2
    double lambda = -1.0;            // lasso; negative means choose by grid
    double lasso_tol = 1e-8;
    std::size_t lasso_max_iter = 1000;

    nlohmann::json to_json() const;
    static SelectConfig from_json(const nlohmann::json& j);
};

/// Every stage fitted during training, in application order. Fitting sees
/// only the rows passed to train_pipeline, never evaluation rows.
struct TrainedPipeline {
    PreprocessConfig prep;
    bool has_imputer = false;
    Imputer imputer;
    LooEncoder loo;
    OneHotEncoder one_hot;
    bool has_scaler = false;
    Scaler scaler;
    bool has_selection = false;
    SelectionResult selection;
    FittedModel model;
};

/// impute -> encode -> scale -> resample -> select -> fit.
TrainedPipeline train_pipeline(const Table& train, const PreprocessConfig& prep,
                               const ResampleSpec& resample, const SelectConfig& select,
                               const LearnerSpec& learner);

/// Applies the fitted stages to raw rows (leave-one-out encoding in new-rows
/// mode) and scores them with the fitted model.
std::vector<double> pipeline_scores(const TrainedPipeline& tp, const Table& raw);

/// The transformed feature table the model consumes, exposed for stage tests.
Table pipeline_transform(const TrainedPipeline& tp, const Table& raw);

/// Lasso lambda by 5-point log grid over [0.001, 1] x lambda_max, scored by
/// 3-fold AUROC of a logistic probe on the selected features; ties prefer the
/// sparser (larger) lambda.
double choose_lasso_lambda(const Matrix& x, const std::vector<double>& y, std::uint64_t seed);

struct FoldResult {
    ConfusionMatrix cm;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, auroc = 0, pr_auc = 0;
    bool precision_defined = true, recall_defined = true, f1_defined = true;
    double fit_seconds = 0, predict_seconds = 0;

    nlohmann::json to_json() const;
    static FoldResult from_json(const nlohmann::json& j);
};

struct EvalReport {
    std::vector<FoldResult> folds;
    double mean_accuracy = 0, std_accuracy = 0;
    double mean_precision = 0, std_precision = 0;
    double mean_recall = 0, std_recall = 0;
    double mean_f1 = 0, std_f1 = 0;
    double mean_auroc = 0, std_auroc = 0;
    double mean_pr_auc = 0, std_pr_auc = 0;
    double mean_fit_seconds = 0, mean_predict_seconds = 0;
    double critical_ratio = 0;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

EvalReport summarize_folds(const std::vector<FoldResult>& folds);

struct CvDetail {
    EvalReport report;
    std::vector<std::vector<std::size_t>> folds;
    std::vector<TrainedPipeline> fold_pipelines;
};

/// Per fold: train every stage on the other folds, evaluate on the held-out
/// fold. Fold f uses seed + f for all stage randomness.
CvDetail cross_validate_detailed(const LearnerSpec& learner, const Table& table, std::size_t k,
                                 const PreprocessConfig& prep = {},
                                 const ResampleSpec& resample = {},
                                 const SelectConfig& select = {}, std::uint64_t seed = 0,
                                 double threshold = 0.5);

EvalReport cross_validate(const LearnerSpec& learner, const Table& table, std::size_t k,
                          const PreprocessConfig& prep = {}, const ResampleSpec& resample = {},
                          const SelectConfig& select = {}, std::uint64_t seed = 0,
                          double threshold = 0.5);

}  // namespace scml
