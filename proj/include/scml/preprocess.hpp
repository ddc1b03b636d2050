#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scml/tabular.hpp"

namespace scml {

/// Supervised leave-one-out encoder. For each categorical column it stores the
/// per-category target sum and count aggregated over the fitting rows; all
/// lookups are keyed by category string so fitted state is independent of any
/// particular table's dictionary.
struct LooEncoder {
    struct CategoryStats {
        double sum = 0.0;
        std::size_t count = 0;
    };

    std::map<std::string, std::map<std::string, CategoryStats>> columns;
    double global_target_mean = 0.0;
    double smoothing = 0.0;
    /// Set when the fitting table had no categorical columns; transform is then
    /// the identity.
    bool identity = false;

    nlohmann::json to_json() const;
    static LooEncoder from_json(const nlohmann::json& j);
};

enum class LooMode { fit_rows, new_rows };

/// Aggregates per-category target sums over rows with a known label.
LooEncoder fit_loo(const Table& table, double smoothing = 0.0);

/// Replaces each fitted categorical column with its encoded numeric values.
/// fit_rows excludes the row's own label from the aggregate; new_rows uses the
/// plain (smoothed) category mean. Unseen and singleton categories fall back
/// to the global target mean.
Table transform_loo(const LooEncoder& encoder, const Table& table, LooMode mode);

/// One-hot encoder; the category list per column is fixed at fit time
/// (first-seen order over the fitting rows).
struct OneHotEncoder {
    std::vector<std::pair<std::string, std::vector<std::string>>> columns;

    nlohmann::json to_json() const;
    static OneHotEncoder from_json(const nlohmann::json& j);
};

OneHotEncoder fit_one_hot(const Table& table, std::size_t max_cardinality);

/// Expands each fitted column of cardinality k into k indicator columns named
/// "col=category". Missing or unseen categories yield an all-zero block.
Table transform_one_hot(const OneHotEncoder& encoder, const Table& table);

/// Convenience fit + transform on one table.
Table one_hot(const Table& table, std::size_t max_cardinality);

/// Mean imputation for numeric columns, modal category for categorical ones.
/// Mode ties break toward the category seen first in the fitting rows.
struct Imputer {
    std::map<std::string, double> numeric_means;
    std::map<std::string, std::string> categorical_modes;

    nlohmann::json to_json() const;
    static Imputer from_json(const nlohmann::json& j);
};

Imputer fit_impute(const Table& table);
Table apply_impute(const Imputer& imputer, const Table& table);

/// Per-column standardization to mean 0 / std 1 (population std, floored).
struct Scaler {
    static constexpr double kStdFloor = 1e-12;

    std::map<std::string, std::pair<double, double>> stats;  // name -> (mean, std)

    nlohmann::json to_json() const;
    static Scaler from_json(const nlohmann::json& j);
};

Scaler fit_scale(const Table& table);
Table apply_scale(const Scaler& scaler, const Table& table);

}  // namespace scml
