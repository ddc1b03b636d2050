#include "scml/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace scml {

std::string to_string(ColumnKind kind) {
    return kind == ColumnKind::numeric ? "numeric" : "categorical";
}

ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::numeric;
    if (s == "categorical") return ColumnKind::categorical;
    throw ConfigError("unknown column kind: " + s);
}

std::size_t Column::missing_count() const {
    std::size_t n = 0;
    for (auto m : missing) n += m;
    return n;
}

const std::string& Column::category_at(std::size_t row) const {
    if (kind != ColumnKind::categorical) throw Error("category_at on numeric column " + name);
    if (missing[row]) throw Error("category_at on missing cell in column " + name);
    return categories[static_cast<std::size_t>(codes[row])];
}

Column Column::make_numeric(std::string name, std::vector<double> values) {
    Column c;
    c.name = std::move(name);
    c.kind = ColumnKind::numeric;
    c.missing.resize(values.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) c.missing[i] = 1;
    }
    c.numeric = std::move(values);
    return c;
}

Column Column::make_categorical(std::string name, const std::vector<std::string>& values) {
    Column c;
    c.name = std::move(name);
    c.kind = ColumnKind::categorical;
    c.codes.reserve(values.size());
    c.missing.reserve(values.size());
    std::unordered_map<std::string, std::int32_t> seen;
    for (const auto& v : values) {
        if (v.empty()) {
            c.codes.push_back(-1);
            c.missing.push_back(1);
            continue;
        }
        auto it = seen.find(v);
        if (it == seen.end()) {
            it = seen.emplace(v, static_cast<std::int32_t>(c.categories.size())).first;
            c.categories.push_back(v);
        }
        c.codes.push_back(it->second);
        c.missing.push_back(0);
    }
    return c;
}

const Column& Table::target() const {
    if (!target_index) throw Error("table has no target column");
    return columns[*target_index];
}

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    throw DataError("column not found: " + name);
}

bool Table::has_column(const std::string& name) const {
    return std::any_of(columns.begin(), columns.end(),
                       [&](const Column& c) { return c.name == name; });
}

std::vector<std::size_t> Table::feature_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (target_index && i == *target_index) continue;
        idx.push_back(i);
    }
    return idx;
}

std::vector<double> Table::target_values() const {
    const Column& t = target();
    std::vector<double> y(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        y[i] = t.missing[i] ? std::numeric_limits<double>::quiet_NaN() : t.numeric[i];
    }
    return y;
}

std::array<std::vector<std::size_t>, 2> Table::class_row_indices() const {
    const Column& t = target();
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (t.missing[i]) continue;
        by_class[t.numeric[i] >= 0.5 ? 1 : 0].push_back(i);
    }
    return by_class;
}

Table Table::select_rows(const std::vector<std::size_t>& rows) const {
    Table out;
    out.target_index = target_index;
    out.label_names = label_names;
    out.n_rows = rows.size();
    out.columns.reserve(columns.size());
    for (const Column& c : columns) {
        Column nc;
        nc.name = c.name;
        nc.kind = c.kind;
        nc.categories = c.categories;
        nc.missing.reserve(rows.size());
        if (c.kind == ColumnKind::numeric) {
            nc.numeric.reserve(rows.size());
            for (std::size_t r : rows) {
                nc.numeric.push_back(c.numeric[r]);
                nc.missing.push_back(c.missing[r]);
            }
        } else {
            nc.codes.reserve(rows.size());
            for (std::size_t r : rows) {
                nc.codes.push_back(c.codes[r]);
                nc.missing.push_back(c.missing[r]);
            }
        }
        out.columns.push_back(std::move(nc));
    }
    return out;
}

void Table::check_consistent() const {
    std::set<std::string> names;
    for (const Column& c : columns) {
        if (c.size() != n_rows) throw Error("column " + c.name + " row count mismatch");
        if (!names.insert(c.name).second) throw DataError("duplicate column name: " + c.name);
    }
    if (target_index && *target_index >= columns.size()) throw Error("target index out of range");
}

namespace {

// RFC-4180-style reader: quoted fields may contain commas, quotes ("" escape)
// and newlines. Rows are vectors of raw cell strings.
std::vector<std::vector<std::string>> parse_csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto end_cell = [&]() {
        row.push_back(cell);
        cell.clear();
        cell_started = false;
    };
    auto end_row = [&]() {
        // Blank line (no commas, no cell content, never quoted): skip it.
        if (row.empty() && cell.empty() && !cell_started) return;
        end_cell();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < n) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                cell_started = true;
                ++i;
                break;
            case ',':
                end_cell();
                ++i;
                break;
            case '\r':
                ++i;
                break;
            case '\n':
                end_row();
                ++i;
                break;
            default:
                cell.push_back(c);
                cell_started = true;
                ++i;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted field in CSV");
    if (cell_started || !cell.empty() || !row.empty()) end_row();
    return rows;
}

std::string quote_cell(const std::string& s) {
    const bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

Table build_table(const std::vector<std::vector<std::string>>& rows, const SchemaOverrides& schema,
                  const std::string& target) {
    if (rows.empty()) throw DataError("CSV has no header row");
    const auto& header = rows.front();
    const std::size_t n_cols = header.size();
    const std::size_t n_rows = rows.size() - 1;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != n_cols) {
            throw DataError("ragged CSV: row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " cells, expected " +
                            std::to_string(n_cols));
        }
    }

    Table table;
    table.n_rows = n_rows;
    std::optional<std::size_t> target_idx;
    for (std::size_t j = 0; j < n_cols; ++j) {
        if (!target.empty() && header[j] == target) target_idx = j;
    }
    if (!target.empty() && !target_idx) throw DataError("target column not found: " + target);

    for (std::size_t j = 0; j < n_cols; ++j) {
        std::vector<std::string> cells(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) cells[r] = rows[r + 1][j];

        if (target_idx && j == *target_idx) {
            // Binary target: map the two distinct raw labels to {0,1}.
            std::set<std::string> distinct;
            for (const auto& s : cells) {
                if (!s.empty()) distinct.insert(s);
            }
            if (n_rows > 0 && distinct.size() != 2) {
                throw DataError("target column '" + header[j] + "' has " +
                                std::to_string(distinct.size()) +
                                " distinct non-missing values, expected 2");
            }
            if (distinct.size() == 2) {
                auto it = distinct.begin();
                table.label_names[0] = *it++;
                table.label_names[1] = *it;
            }
            Column c;
            c.name = header[j];
            c.kind = ColumnKind::numeric;
            c.numeric.resize(n_rows, std::numeric_limits<double>::quiet_NaN());
            c.missing.resize(n_rows, 0);
            for (std::size_t r = 0; r < n_rows; ++r) {
                if (cells[r].empty()) {
                    c.missing[r] = 1;
                } else {
                    c.numeric[r] = cells[r] == table.label_names[1] ? 1.0 : 0.0;
                }
            }
            table.columns.push_back(std::move(c));
            continue;
        }

        ColumnKind kind;
        auto ov = schema.find(header[j]);
        if (ov != schema.end()) {
            kind = ov->second;
        } else {
            bool all_numeric = true;
            double tmp;
            for (const auto& s : cells) {
                if (s.empty()) continue;
                if (!parse_double(s, tmp)) {
                    all_numeric = false;
                    break;
                }
            }
            kind = all_numeric ? ColumnKind::numeric : ColumnKind::categorical;
        }

        if (kind == ColumnKind::numeric) {
            std::vector<double> vals(n_rows, std::numeric_limits<double>::quiet_NaN());
            for (std::size_t r = 0; r < n_rows; ++r) {
                if (cells[r].empty()) continue;
                if (!parse_double(cells[r], vals[r])) {
                    throw DataError("column '" + header[j] + "' declared numeric but cell '" +
                                    cells[r] + "' is not a number");
                }
            }
            table.columns.push_back(Column::make_numeric(header[j], std::move(vals)));
        } else {
            table.columns.push_back(Column::make_categorical(header[j], cells));
        }
    }

    if (target_idx) table.target_index = target_idx;
    table.check_consistent();
    return table;
}

}  // namespace

Table load_csv_text(const std::string& text, const SchemaOverrides& schema,
                    const std::string& target) {
    return build_table(parse_csv_rows(text), schema, target);
}

Table load_csv(const std::string& path, const SchemaOverrides& schema, const std::string& target) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("error reading file: " + path);
    return load_csv_text(ss.str(), schema, target);
}

std::string to_csv_text(const Table& table) {
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out.push_back(',');
        out += quote_cell(table.columns[j].name);
    }
    out.push_back('\n');
    const bool has_target = table.has_target();
    const std::size_t tgt = has_target ? *table.target_index : 0;
    for (std::size_t r = 0; r < table.n_rows; ++r) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            if (j) out.push_back(',');
            const Column& c = table.columns[j];
            if (c.missing[r]) continue;  // empty cell
            if (has_target && j == tgt) {
                out += quote_cell(table.label_names[c.numeric[r] >= 0.5 ? 1 : 0]);
            } else if (c.kind == ColumnKind::numeric) {
                out += format_double(c.numeric[r]);
            } else {
                out += quote_cell(c.categories[static_cast<std::size_t>(c.codes[r])]);
            }
        }
        out.push_back('\n');
    }
    return out;
}

void save_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << to_csv_text(table);
    if (!out) throw DataError("error writing file: " + path);
}

SchemaOverrides recorded_schema(const Table& table) {
    SchemaOverrides schema;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (table.target_index && j == *table.target_index) continue;
        schema[table.columns[j].name] = table.columns[j].kind;
    }
    return schema;
}

ProfileReport profile(const Table& table) {
    if (table.n_rows == 0) throw DataError("profile: table is empty");
    ProfileReport rep;
    rep.n_rows = table.n_rows;
    for (const Column& c : table.columns) {
        ColumnProfile p;
        p.name = c.name;
        p.kind = c.kind;
        p.missing_count = c.missing_count();
        if (c.kind == ColumnKind::numeric) {
            double sum = 0.0, sum_sq = 0.0;
            double mn = std::numeric_limits<double>::infinity();
            double mx = -std::numeric_limits<double>::infinity();
            std::size_t n = 0;
            for (std::size_t r = 0; r < table.n_rows; ++r) {
                if (c.missing[r]) continue;
                const double v = c.numeric[r];
                sum += v;
                sum_sq += v * v;
                mn = std::min(mn, v);
                mx = std::max(mx, v);
                ++n;
            }
            p.value_count = n;
            if (n > 0) {
                p.min = mn;
                p.max = mx;
                p.mean = sum / static_cast<double>(n);
                const double var = std::max(0.0, sum_sq / static_cast<double>(n) - p.mean * p.mean);
                p.std_dev = std::sqrt(var);
            }
        } else {
            std::set<std::int32_t> seen;
            for (std::size_t r = 0; r < table.n_rows; ++r) {
                if (!c.missing[r]) seen.insert(c.codes[r]);
            }
            p.cardinality = seen.size();
        }
        rep.columns.push_back(std::move(p));
    }
    if (table.has_target()) {
        rep.has_target = true;
        auto by_class = table.class_row_indices();
        rep.n_negative = by_class[0].size();
        rep.n_positive = by_class[1].size();
        const auto mn = std::min(rep.n_negative, rep.n_positive);
        const auto mx = std::max(rep.n_negative, rep.n_positive);
        rep.imbalance_ratio = mn > 0 ? static_cast<double>(mx) / static_cast<double>(mn)
                                     : std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

nlohmann::json ProfileReport::to_json() const {
    nlohmann::json j;
    j["n_rows"] = n_rows;
    auto cols = nlohmann::json::array();
    for (const auto& p : columns) {
        nlohmann::json c;
        c["name"] = p.name;
        c["kind"] = to_string(p.kind);
        c["missing_count"] = p.missing_count;
        if (p.kind == ColumnKind::numeric) {
            if (p.value_count > 0) {
                c["min"] = p.min;
                c["max"] = p.max;
                c["mean"] = p.mean;
                c["std"] = p.std_dev;
            } else {
                c["min"] = nullptr;
                c["max"] = nullptr;
                c["mean"] = nullptr;
                c["std"] = nullptr;
            }
        } else {
            c["cardinality"] = p.cardinality;
        }
        cols.push_back(std::move(c));
    }
    j["columns"] = std::move(cols);
    if (has_target) {
        j["class_counts"] = {{"negative", n_negative}, {"positive", n_positive}};
        if (std::isnan(imbalance_ratio)) {
            j["imbalance_ratio"] = nullptr;
        } else {
            j["imbalance_ratio"] = imbalance_ratio;
        }
    }
    return j;
}

namespace {

// Per-stratum train count: nearest integer to fraction*n, clamped so both
// sides keep at least one row.
std::size_t clamped_train_count(std::size_t n, double fraction) {
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    k = std::min(k, n - 1);
    k = std::max<std::size_t>(k, 1);
    return k;
}

}  // namespace

std::pair<Table, Table> split_train_test(const Table& table, double train_fraction,
                                         bool stratified, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0,1)");
    }
    if (table.n_rows < 2) throw DataError("cannot split a table with fewer than 2 rows");
    Rng rng(seed);
    std::vector<std::size_t> train_idx, test_idx;

    if (stratified) {
        if (!table.has_target()) throw ConfigError("stratified split requires a target");
        auto by_class = table.class_row_indices();
        // Rows with missing labels form their own stratum (may be empty).
        std::vector<std::size_t> unlabeled;
        const Column& t = table.target();
        for (std::size_t i = 0; i < table.n_rows; ++i) {
            if (t.missing[i]) unlabeled.push_back(i);
        }
        for (int cls = 0; cls < 2; ++cls) {
            auto& idx = by_class[static_cast<std::size_t>(cls)];
            if (idx.size() < 2) {
                throw DataError("stratified split infeasible: class " + std::to_string(cls) +
                                " has " + std::to_string(idx.size()) + " rows");
            }
            rng.shuffle(idx);
            const std::size_t k = clamped_train_count(idx.size(), train_fraction);
            train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
            test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
        }
        if (!unlabeled.empty()) {
            rng.shuffle(unlabeled);
            auto k = static_cast<std::size_t>(
                std::llround(train_fraction * static_cast<double>(unlabeled.size())));
            k = std::min(k, unlabeled.size());
            train_idx.insert(train_idx.end(), unlabeled.begin(),
                             unlabeled.begin() + static_cast<std::ptrdiff_t>(k));
            test_idx.insert(test_idx.end(), unlabeled.begin() + static_cast<std::ptrdiff_t>(k),
                            unlabeled.end());
        }
    } else {
        auto perm = rng.permutation(table.n_rows);
        const std::size_t k = clamped_train_count(table.n_rows, train_fraction);
        train_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
        test_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());
    }

    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {table.select_rows(train_idx), table.select_rows(test_idx)};
}

}  // namespace scml
