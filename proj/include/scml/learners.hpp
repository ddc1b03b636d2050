#pragma once

#include <json.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scml/core.hpp"

namespace scml {

enum class LearnerKind {
    logistic_regression,
    decision_tree,
    random_forest,
    bagging,
    adaboost,
    gradient_boosting,
    rusboost,
    gaussian_nb,
    knn,
    linear_svm,
    mlp,
    self_training,
    kmeans_anomaly,
};

LearnerKind learner_kind_from_string(const std::string& s);
std::string to_string(LearnerKind kind);
const std::vector<LearnerKind>& all_learner_kinds();

/// False only for kmeans_anomaly, which ignores labels entirely.
/// self_training counts as supervised but tolerates missing labels.
bool is_supervised(LearnerKind kind);

struct LearnerSpec {
    LearnerKind kind = LearnerKind::logistic_regression;
    std::map<std::string, double> params;
    /// Base learner for self_training (empty or one element).
    std::vector<LearnerSpec> base;
    std::uint64_t seed = 0;

    double param(const std::string& name, double fallback) const;
    nlohmann::json to_json() const;
    static LearnerSpec from_json(const nlohmann::json& j);
};

/// Immutable fitted state behind the uniform scoring interface. score() is a
/// probability of class 1 (calibrated for margin- and distance-based kinds).
class Model {
public:
    virtual ~Model() = default;
    virtual double score(const double* x, std::size_t d) const = 0;
    virtual nlohmann::json to_json() const = 0;
};

std::shared_ptr<const Model> model_from_json(const nlohmann::json& j);

struct FittedModel {
    LearnerSpec spec;
    std::size_t n_features = 0;
    double fit_seconds = 0.0;
    std::shared_ptr<const Model> model;
    /// Training logistic loss after each boosting round (gradient_boosting
    /// only, not serialized).
    std::vector<double> loss_path;

    nlohmann::json to_json() const;
    static FittedModel from_json(const nlohmann::json& j);
};

/// Trains spec on x (rows) against 0/1 labels y. NaN labels mark unlabeled
/// rows and are accepted only by self_training and kmeans_anomaly.
FittedModel fit(const LearnerSpec& spec, const Matrix& x, const std::vector<double>& y);

std::vector<double> predict_proba(const FittedModel& model, const Matrix& x);

/// 1 iff probability >= threshold.
std::vector<int> predict(const FittedModel& model, const Matrix& x, double threshold = 0.5);

/// Mean negative log-likelihood of the logistic model plus (l2/2)*|w|^2 on
/// the non-intercept weights. w holds n_features weights then the intercept.
/// Gradient written to *grad when non-null. Exposed for finite-difference
/// verification of the training gradients.
double logistic_loss_grad(const Matrix& x, const std::vector<double>& y,
                          const std::vector<double>& w, double l2,
                          std::vector<double>* grad);

/// Mean cross-entropy of the one-hidden-layer tanh network on flattened
/// parameters [W1 (hidden x d, row-major), b1, W2, b2].
double mlp_loss_grad(const Matrix& x, const std::vector<double>& y, std::size_t hidden,
                     const std::vector<double>& params, std::vector<double>* grad);

std::size_t mlp_param_count(std::size_t n_features, std::size_t hidden);

}  // namespace scml
