#pragma once

#include <json.hpp>

#include "scml/tabular.hpp"

namespace scml {

enum class SelectMethod { lasso, pearson, chi2 };

SelectMethod select_method_from_string(const std::string& s);
std::string to_string(SelectMethod m);

struct SelectionResult {
    SelectMethod method = SelectMethod::pearson;
    std::vector<double> scores;
    std::vector<std::size_t> support;  // ascending feature indices
    double lambda = 0.0;               // lasso only
    std::vector<double> weights;       // lasso only
    bool converged = true;
    /// Objective value after each coordinate-descent sweep (lasso only, not
    /// serialized). Non-increasing by construction.
    std::vector<double> objective_path;

    nlohmann::json to_json() const;
    static SelectionResult from_json(const nlohmann::json& j);
};

/// Features of `table` as a dense row-major matrix (target excluded).
/// All feature columns must be numeric.
Matrix feature_matrix(const Table& table);

SelectionResult pearson_filter(const Matrix& x, const std::vector<double>& y, std::size_t top_k);

/// Pearson's chi-squared of each feature against the class, on the 2xC table
/// of class-conditional feature sums and their complements against the
/// per-class maximum attainable sum. Requires non-negative entries.
SelectionResult chi2_filter(const Matrix& x, const std::vector<double>& y, std::size_t top_k);

SelectionResult lasso_fit(const Matrix& x, const std::vector<double>& y, double lambda,
                          double tol = 1e-8, std::size_t max_iter = 1000);

/// Smallest lambda for which lasso_fit returns the all-zero solution.
double lasso_lambda_max(const Matrix& x, const std::vector<double>& y);

/// Projects the table onto the selected feature columns, keeping the target.
Table apply_selection(const SelectionResult& result, const Table& table);

}  // namespace scml
