#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scml/core.hpp"

#include <json.hpp>

namespace scml {

enum class ColumnKind { numeric, categorical };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

/// One column of a Table. Numeric columns carry doubles (NaN where missing);
/// categorical columns carry codes into a first-seen dictionary (-1 where
/// missing). Missing entries are flagged, never silently imputed here.
struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> numeric;
    std::vector<std::int32_t> codes;
    std::vector<std::string> categories;
    std::vector<std::uint8_t> missing;

    std::size_t size() const { return missing.size(); }
    std::size_t missing_count() const;
    bool is_missing(std::size_t row) const { return missing[row] != 0; }

    /// Category string for a row; throws if the row is missing or the column numeric.
    const std::string& category_at(std::size_t row) const;

    static Column make_numeric(std::string name, std::vector<double> values);
    static Column make_categorical(std::string name, const std::vector<std::string>& values);
};

/// Column-typed tabular dataset with an optional binary target.
/// Immutable by convention after construction: every transformation in the
/// library returns a new Table.
struct Table {
    std::vector<Column> columns;
    std::size_t n_rows = 0;
    std::optional<std::size_t> target_index;
    /// Raw labels mapped to class 0 and class 1 (lexicographically smaller -> 0).
    std::array<std::string, 2> label_names{{"0", "1"}};

    bool has_target() const { return target_index.has_value(); }
    const Column& target() const;
    std::size_t n_features() const { return columns.size() - (has_target() ? 1 : 0); }

    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;

    /// Feature column indices (everything but the target), in table order.
    std::vector<std::size_t> feature_indices() const;

    /// Target values as 0/1 doubles, NaN where the label is missing.
    std::vector<double> target_values() const;

    /// Row indices with a non-missing label, split by class: {negatives, positives}.
    std::array<std::vector<std::size_t>, 2> class_row_indices() const;

    Table select_rows(const std::vector<std::size_t>& rows) const;

    void check_consistent() const;
};

struct ColumnProfile {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::size_t missing_count = 0;
    // numeric columns
    double min = 0.0, max = 0.0, mean = 0.0, std_dev = 0.0;
    std::size_t value_count = 0;
    // categorical columns
    std::size_t cardinality = 0;
};

struct ProfileReport {
    std::size_t n_rows = 0;
    std::vector<ColumnProfile> columns;
    bool has_target = false;
    std::size_t n_negative = 0;
    std::size_t n_positive = 0;
    double imbalance_ratio = 0.0;

    nlohmann::json to_json() const;
};

/// Column-kind overrides by column name, applied before inference.
using SchemaOverrides = std::map<std::string, ColumnKind>;

/// Loads a CSV file (comma separator, double-quote escaping, UTF-8).
/// Kinds are inferred per column: all non-missing cells parseable as a number
/// -> numeric, else categorical, unless overridden. Empty cells become
/// missing. `target`, when non-empty, names the column mapped to {0,1}.
Table load_csv(const std::string& path, const SchemaOverrides& schema = {},
               const std::string& target = "");

/// Same as load_csv but from in-memory text (used by tests and round trips).
Table load_csv_text(const std::string& text, const SchemaOverrides& schema = {},
                    const std::string& target = "");

/// Writes the table back to CSV. Numeric cells use the shortest decimal that
/// round-trips exactly; the target column is written with its raw labels.
void save_csv(const Table& table, const std::string& path);
std::string to_csv_text(const Table& table);

/// Recorded schema of a table, suitable for reloading its CSV byte-exactly.
SchemaOverrides recorded_schema(const Table& table);

ProfileReport profile(const Table& table);

/// Disjoint row partition into (train, test). Stratified splits preserve the
/// class ratio within one row per class and require every class to have at
/// least two rows.
std::pair<Table, Table> split_train_test(const Table& table, double train_fraction,
                                         bool stratified, std::uint64_t seed);

}  // namespace scml
