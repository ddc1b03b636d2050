#pragma once

#include <json.hpp>

#include "scml/learners.hpp"

namespace scml {

struct Attribution {
    double base_value = 0.0;  // expected score over the background
    std::vector<double> phi;
    double prediction = 0.0;
    bool regularized = false;  // kernel WLS needed a ridge fallback

    nlohmann::json to_json() const;
};

/// Interventional Shapley values by full coalition enumeration. v(S) is the
/// mean model score over background rows with the instance's values spliced
/// in on S. Capped at 14 features (2^M coalitions).
Attribution shapley_exact(const FittedModel& model, const std::vector<double>& instance,
                          const Matrix& background);

/// Sampled approximation: weighted least squares over coalitions with the
/// Shapley kernel weight (M-1)/(C(M,s)*s*(M-s)), efficiency enforced by
/// construction. When the budget covers all 2^M-2 proper coalitions they are
/// enumerated instead, which reproduces the exact values.
Attribution kernel_shap(const FittedModel& model, const std::vector<double>& instance,
                        const Matrix& background, std::size_t n_coalitions, std::uint64_t seed);

enum class ExplainMethod { exact, kernel, auto_select };

ExplainMethod explain_method_from_string(const std::string& s);
std::string to_string(ExplainMethod m);

struct GlobalImportance {
    std::vector<double> values;        // mean |phi| per feature
    std::vector<std::size_t> ranking;  // feature indices, descending importance

    nlohmann::json to_json() const;
};

/// Mean |phi| per feature over the sample rows. auto_select uses exact
/// enumeration up to 14 features and kernel sampling beyond.
GlobalImportance global_importance(const FittedModel& model, const Matrix& sample,
                                   const Matrix& background,
                                   ExplainMethod method = ExplainMethod::auto_select,
                                   std::size_t n_coalitions = 2048, std::uint64_t seed = 0);

/// Force-plot document: contributions partitioned by sign, each side ordered
/// by |phi| descending; zero contributions are dropped.
nlohmann::json force_plot_export(const Attribution& attribution,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<double>& feature_values);

/// Horizontal bar chart of global importances, largest on top.
std::string importance_to_svg(const GlobalImportance& importance,
                              const std::vector<std::string>& feature_names);

}  // namespace scml
