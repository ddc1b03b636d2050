#include "scml/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace scml {

LooEncoder fit_loo(const Table& table, double smoothing) {
    if (!table.has_target()) throw ConfigError("fit_loo requires a target column");
    if (smoothing < 0.0) throw ConfigError("loo smoothing must be >= 0");

    LooEncoder enc;
    enc.smoothing = smoothing;

    const Column& target = table.target();
    double y_sum = 0.0;
    std::size_t y_count = 0;
    for (std::size_t r = 0; r < table.n_rows; ++r) {
        if (target.missing[r]) continue;
        y_sum += target.numeric[r];
        ++y_count;
    }
    enc.global_target_mean = y_count > 0 ? y_sum / static_cast<double>(y_count) : 0.0;

    for (std::size_t j : table.feature_indices()) {
        const Column& c = table.columns[j];
        if (c.kind != ColumnKind::categorical) continue;
        auto& stats = enc.columns[c.name];
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (c.missing[r] || target.missing[r]) continue;
            auto& cs = stats[c.category_at(r)];
            cs.sum += target.numeric[r];
            cs.count += 1;
        }
    }
    enc.identity = enc.columns.empty();
    return enc;
}

Table transform_loo(const LooEncoder& encoder, const Table& table, LooMode mode) {
    if (encoder.identity) return table;
    if (mode == LooMode::fit_rows && !table.has_target()) {
        throw ConfigError("transform_loo fit_rows mode requires the target column");
    }

    const double s = encoder.smoothing;
    const double y_bar = encoder.global_target_mean;
    const Column* target = table.has_target() ? &table.target() : nullptr;

    Table out = table;
    for (Column& c : out.columns) {
        if (c.kind != ColumnKind::categorical) continue;
        auto col_it = encoder.columns.find(c.name);
        if (col_it == encoder.columns.end()) continue;
        const auto& stats = col_it->second;

        std::vector<double> encoded(out.n_rows, y_bar);
        for (std::size_t r = 0; r < out.n_rows; ++r) {
            if (c.missing[r]) continue;  // missing category -> global mean
            auto it = stats.find(c.category_at(r));
            if (it == stats.end()) continue;  // unseen -> global mean
            const auto& cs = it->second;
            const bool own_label_known =
                mode == LooMode::fit_rows && target != nullptr && !target->missing[r];
            if (own_label_known) {
                if (cs.count <= 1) continue;  // singleton -> global mean
                encoded[r] = (cs.sum - target->numeric[r] + s * y_bar) /
                             (static_cast<double>(cs.count) - 1.0 + s);
            } else {
                encoded[r] = (cs.sum + s * y_bar) / (static_cast<double>(cs.count) + s);
            }
        }
        c.kind = ColumnKind::numeric;
        c.numeric = std::move(encoded);
        c.codes.clear();
        c.categories.clear();
        std::fill(c.missing.begin(), c.missing.end(), 0);
    }
    return out;
}

nlohmann::json LooEncoder::to_json() const {
    nlohmann::json cols = nlohmann::json::object();
    for (const auto& [name, stats] : columns) {
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [cat, cs] : stats) m[cat] = {{"sum", cs.sum}, {"count", cs.count}};
        cols[name] = std::move(m);
    }
    return {{"columns", std::move(cols)},
            {"global_target_mean", global_target_mean},
            {"smoothing", smoothing},
            {"identity", identity}};
}

LooEncoder LooEncoder::from_json(const nlohmann::json& j) {
    LooEncoder enc;
    enc.global_target_mean = j.at("global_target_mean").get<double>();
    enc.smoothing = j.at("smoothing").get<double>();
    enc.identity = j.at("identity").get<bool>();
    for (const auto& [name, m] : j.at("columns").items()) {
        auto& stats = enc.columns[name];
        for (const auto& [cat, cs] : m.items()) {
            stats[cat] = {cs.at("sum").get<double>(), cs.at("count").get<std::size_t>()};
        }
    }
    return enc;
}

OneHotEncoder fit_one_hot(const Table& table, std::size_t max_cardinality) {
    OneHotEncoder enc;
    for (std::size_t j : table.feature_indices()) {
        const Column& c = table.columns[j];
        if (c.kind != ColumnKind::categorical) continue;
        // First-seen order over the fitting rows (not the dictionary, which may
        // carry categories from rows outside this table).
        std::vector<std::string> cats;
        std::unordered_map<std::string, bool> seen;
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (c.missing[r]) continue;
            const std::string& cat = c.category_at(r);
            if (!seen[cat]) {
                seen[cat] = true;
                cats.push_back(cat);
            }
        }
        if (cats.size() > max_cardinality) {
            throw DataError("one_hot: column '" + c.name + "' has cardinality " +
                            std::to_string(cats.size()) + " above the cap " +
                            std::to_string(max_cardinality));
        }
        enc.columns.emplace_back(c.name, std::move(cats));
    }
    return enc;
}

Table transform_one_hot(const OneHotEncoder& encoder, const Table& table) {
    std::map<std::string, const std::vector<std::string>*> fitted;
    for (const auto& [name, cats] : encoder.columns) fitted[name] = &cats;

    Table out;
    out.n_rows = table.n_rows;
    out.label_names = table.label_names;
    std::optional<std::size_t> new_target;

    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        const Column& c = table.columns[j];
        const bool is_target = table.target_index && j == *table.target_index;
        auto it = is_target ? fitted.end() : fitted.find(c.name);
        if (it == fitted.end()) {
            if (is_target) new_target = out.columns.size();
            out.columns.push_back(c);
            continue;
        }
        const auto& cats = *it->second;
        std::unordered_map<std::string, std::size_t> pos;
        for (std::size_t k = 0; k < cats.size(); ++k) pos[cats[k]] = k;
        std::vector<std::vector<double>> blocks(cats.size(),
                                                std::vector<double>(table.n_rows, 0.0));
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (c.missing[r]) continue;
            auto p = pos.find(c.category_at(r));
            if (p == pos.end()) continue;  // unseen -> all-zero block
            blocks[p->second][r] = 1.0;
        }
        for (std::size_t k = 0; k < cats.size(); ++k) {
            out.columns.push_back(Column::make_numeric(c.name + "=" + cats[k],
                                                       std::move(blocks[k])));
        }
    }
    out.target_index = new_target;
    out.check_consistent();
    return out;
}

Table one_hot(const Table& table, std::size_t max_cardinality) {
    return transform_one_hot(fit_one_hot(table, max_cardinality), table);
}

nlohmann::json OneHotEncoder::to_json() const {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& [name, cats] : columns) cols.push_back({{"name", name}, {"categories", cats}});
    return {{"columns", std::move(cols)}};
}

OneHotEncoder OneHotEncoder::from_json(const nlohmann::json& j) {
    OneHotEncoder enc;
    for (const auto& c : j.at("columns")) {
        enc.columns.emplace_back(c.at("name").get<std::string>(),
                                 c.at("categories").get<std::vector<std::string>>());
    }
    return enc;
}

Imputer fit_impute(const Table& table) {
    Imputer imp;
    for (std::size_t j : table.feature_indices()) {
        const Column& c = table.columns[j];
        if (c.kind == ColumnKind::numeric) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t r = 0; r < table.n_rows; ++r) {
                if (c.missing[r]) continue;
                sum += c.numeric[r];
                ++n;
            }
            if (n == 0) throw DataError("fit_impute: column '" + c.name + "' is entirely missing");
            imp.numeric_means[c.name] = sum / static_cast<double>(n);
        } else {
            std::unordered_map<std::string, std::size_t> counts;
            std::unordered_map<std::string, std::size_t> first_seen;
            for (std::size_t r = 0; r < table.n_rows; ++r) {
                if (c.missing[r]) continue;
                const std::string& cat = c.category_at(r);
                if (counts[cat]++ == 0) first_seen[cat] = r;
            }
            if (counts.empty()) {
                throw DataError("fit_impute: column '" + c.name + "' is entirely missing");
            }
            std::string best;
            std::size_t best_count = 0;
            std::size_t best_first = table.n_rows;
            for (const auto& [cat, n] : counts) {
                const std::size_t fs = first_seen[cat];
                if (n > best_count || (n == best_count && fs < best_first)) {
                    best = cat;
                    best_count = n;
                    best_first = fs;
                }
            }
            imp.categorical_modes[c.name] = best;
        }
    }
    return imp;
}

Table apply_impute(const Imputer& imputer, const Table& table) {
    Table out = table;
    for (std::size_t j = 0; j < out.columns.size(); ++j) {
        if (out.target_index && j == *out.target_index) continue;
        Column& c = out.columns[j];
        if (c.kind == ColumnKind::numeric) {
            auto it = imputer.numeric_means.find(c.name);
            if (it == imputer.numeric_means.end()) continue;
            for (std::size_t r = 0; r < out.n_rows; ++r) {
                if (c.missing[r]) {
                    c.numeric[r] = it->second;
                    c.missing[r] = 0;
                }
            }
        } else {
            auto it = imputer.categorical_modes.find(c.name);
            if (it == imputer.categorical_modes.end()) continue;
            if (c.missing_count() == 0) continue;
            std::int32_t code = -1;
            for (std::size_t k = 0; k < c.categories.size(); ++k) {
                if (c.categories[k] == it->second) {
                    code = static_cast<std::int32_t>(k);
                    break;
                }
            }
            if (code < 0) {
                code = static_cast<std::int32_t>(c.categories.size());
                c.categories.push_back(it->second);
            }
            for (std::size_t r = 0; r < out.n_rows; ++r) {
                if (c.missing[r]) {
                    c.codes[r] = code;
                    c.missing[r] = 0;
                }
            }
        }
    }
    return out;
}

nlohmann::json Imputer::to_json() const {
    return {{"numeric_means", numeric_means}, {"categorical_modes", categorical_modes}};
}

Imputer Imputer::from_json(const nlohmann::json& j) {
    Imputer imp;
    imp.numeric_means = j.at("numeric_means").get<std::map<std::string, double>>();
    imp.categorical_modes =
        j.at("categorical_modes").get<std::map<std::string, std::string>>();
    return imp;
}

Scaler fit_scale(const Table& table) {
    Scaler sc;
    for (std::size_t j : table.feature_indices()) {
        const Column& c = table.columns[j];
        if (c.kind != ColumnKind::numeric) continue;
        double sum = 0.0, sum_sq = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < table.n_rows; ++r) {
            if (c.missing[r]) continue;
            sum += c.numeric[r];
            sum_sq += c.numeric[r] * c.numeric[r];
            ++n;
        }
        if (n == 0) continue;
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
        sc.stats[c.name] = {mean, std::sqrt(var)};
    }
    return sc;
}

Table apply_scale(const Scaler& scaler, const Table& table) {
    Table out = table;
    for (std::size_t j = 0; j < out.columns.size(); ++j) {
        if (out.target_index && j == *out.target_index) continue;
        Column& c = out.columns[j];
        if (c.kind != ColumnKind::numeric) continue;
        auto it = scaler.stats.find(c.name);
        if (it == scaler.stats.end()) continue;
        const double mean = it->second.first;
        const double divisor = std::max(it->second.second, Scaler::kStdFloor);
        for (std::size_t r = 0; r < out.n_rows; ++r) {
            if (!c.missing[r]) c.numeric[r] = (c.numeric[r] - mean) / divisor;
        }
    }
    return out;
}

nlohmann::json Scaler::to_json() const {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [name, ms] : stats) m[name] = {{"mean", ms.first}, {"std", ms.second}};
    return {{"stats", std::move(m)}};
}

Scaler Scaler::from_json(const nlohmann::json& j) {
    Scaler sc;
    for (const auto& [name, ms] : j.at("stats").items()) {
        sc.stats[name] = {ms.at("mean").get<double>(), ms.at("std").get<double>()};
    }
    return sc;
}

}  // namespace scml
