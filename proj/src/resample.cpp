#include "scml/resample.hpp"

#include <algorithm>
#include <cmath>

namespace scml {

namespace {

struct ClassSplit {
    std::vector<std::size_t> minority;
    std::vector<std::size_t> majority;
    int minority_label = 1;
};

ClassSplit split_classes(const Table& table) {
    if (!table.has_target()) throw ConfigError("resampling requires a target column");
    auto by_class = table.class_row_indices();
    ClassSplit s;
    // tie -> the positive class counts as minority
    if (by_class[0].size() < by_class[1].size()) {
        s.minority = std::move(by_class[0]);
        s.majority = std::move(by_class[1]);
        s.minority_label = 0;
    } else {
        s.minority = std::move(by_class[1]);
        s.majority = std::move(by_class[0]);
        s.minority_label = 1;
    }
    return s;
}

std::size_t oversample_need(double target_ratio, std::size_t n_majority, std::size_t n_minority) {
    const double want = std::ceil(target_ratio * double(n_majority));
    if (want <= double(n_minority)) return 0;
    return static_cast<std::size_t>(want) - n_minority;
}

void append_copy_of_row(Table& out, const Table& src, std::size_t row) {
    for (std::size_t c = 0; c < src.columns.size(); ++c) {
        const Column& in = src.columns[c];
        Column& dst = out.columns[c];
        dst.missing.push_back(in.missing[row]);
        if (in.kind == ColumnKind::numeric) {
            dst.numeric.push_back(in.numeric[row]);
        } else {
            dst.codes.push_back(in.codes[row]);
        }
    }
    ++out.n_rows;
}

}  // namespace

ResampleMethod resample_method_from_string(const std::string& s) {
    if (s == "none") return ResampleMethod::none;
    if (s == "smote") return ResampleMethod::smote;
    if (s == "random_over") return ResampleMethod::random_over;
    if (s == "random_under") return ResampleMethod::random_under;
    throw ConfigError("unknown resample method: " + s);
}

std::string to_string(ResampleMethod m) {
    switch (m) {
        case ResampleMethod::none: return "none";
        case ResampleMethod::smote: return "smote";
        case ResampleMethod::random_over: return "random_over";
        case ResampleMethod::random_under: return "random_under";
    }
    throw ConfigError("bad resample method value");
}

void ResampleSpec::validate() const {
    if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
    if (!(target_ratio > 0.0 && target_ratio <= 1.0))
        throw ConfigError("target_ratio must be in (0, 1]");
}

nlohmann::json ResampleSpec::to_json() const {
    return {{"method", to_string(method)},
            {"k_neighbors", k_neighbors},
            {"target_ratio", target_ratio},
            {"seed", seed}};
}

ResampleSpec ResampleSpec::from_json(const nlohmann::json& j) {
    ResampleSpec spec;
    if (j.contains("method")) spec.method = resample_method_from_string(j.at("method"));
    if (j.contains("k_neighbors")) spec.k_neighbors = j.at("k_neighbors");
    if (j.contains("target_ratio")) spec.target_ratio = j.at("target_ratio");
    if (j.contains("seed")) spec.seed = j.at("seed");
    spec.validate();
    return spec;
}

Table smote(const Table& table, const ResampleSpec& spec) {
    spec.validate();
    ClassSplit cls = split_classes(table);
    for (std::size_t c : table.feature_indices()) {
        if (table.columns[c].kind != ColumnKind::numeric)
            throw DataError("smote requires numeric features; encode '" +
                            table.columns[c].name + "' first");
    }
    const std::size_t n_min = cls.minority.size();
    if (n_min < 2) throw DataError("smote needs at least 2 minority rows");

    const std::size_t need = oversample_need(spec.target_ratio, cls.majority.size(), n_min);
    Table out = table;
    if (need == 0) return out;

    const auto features = table.feature_indices();
    const std::size_t d = features.size();
    auto point = [&](std::size_t row, std::vector<double>& buf) {
        buf.resize(d);
        for (std::size_t j = 0; j < d; ++j) buf[j] = table.columns[features[j]].numeric[row];
    };

    const std::size_t k = std::min<std::size_t>(spec.k_neighbors, n_min - 1);
    // k nearest minority neighbors per minority point, ties broken by row index
    std::vector<std::vector<std::size_t>> nn(n_min);
    std::vector<double> pi, pj;
    for (std::size_t i = 0; i < n_min; ++i) {
        point(cls.minority[i], pi);
        std::vector<std::pair<double, std::size_t>> dists;
        dists.reserve(n_min - 1);
        for (std::size_t j = 0; j < n_min; ++j) {
            if (j == i) continue;
            point(cls.minority[j], pj);
            dists.emplace_back(squared_distance(pi.data(), pj.data(), d), cls.minority[j]);
        }
        std::sort(dists.begin(), dists.end());
        nn[i].reserve(k);
        for (std::size_t j = 0; j < k; ++j) nn[i].push_back(dists[j].second);
    }

    Rng rng(spec.seed);
    std::vector<double> synth(d);
    for (std::size_t t = 0; t < need; ++t) {
        const std::size_t i = t % n_min;
        const std::size_t seed_row = cls.minority[i];
        const std::size_t nn_row = nn[i][static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))];
        const double u = rng.uniform01();
        point(seed_row, pi);
        point(nn_row, pj);
        for (std::size_t j = 0; j < d; ++j) synth[j] = pi[j] + u * (pj[j] - pi[j]);
        std::size_t fj = 0;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            Column& dst = out.columns[c];
            if (table.target_index && c == *table.target_index) {
                dst.numeric.push_back(double(cls.minority_label));
                dst.missing.push_back(0);
            } else {
                dst.numeric.push_back(synth[fj]);
                dst.missing.push_back(std::isnan(synth[fj]) ? 1 : 0);
                ++fj;
            }
        }
        ++out.n_rows;
    }
    out.check_consistent();
    return out;
}

Table random_over(const Table& table, const ResampleSpec& spec) {
    spec.validate();
    ClassSplit cls = split_classes(table);
    const std::size_t n_min = cls.minority.size();
    if (n_min == 0) throw DataError("random_over needs at least one minority row");
    const std::size_t need = oversample_need(spec.target_ratio, cls.majority.size(), n_min);
    Table out = table;
    Rng rng(spec.seed);
    for (std::size_t t = 0; t < need; ++t) {
        const std::size_t pick = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(n_min) - 1));
        append_copy_of_row(out, table, cls.minority[pick]);
    }
    out.check_consistent();
    return out;
}

Table random_under(const Table& table, const ResampleSpec& spec) {
    spec.validate();
    ClassSplit cls = split_classes(table);
    const std::size_t n_min = cls.minority.size();
    const std::size_t n_maj = cls.majority.size();
    if (n_min == 0) throw DataError("random_under needs at least one minority row");
    const double observed = double(n_min) / double(n_maj);
    if (spec.target_ratio < observed)
        throw DataError("random_under cannot lower the class ratio below the observed " +
                        format_double(observed));
    std::size_t n_keep = static_cast<std::size_t>(std::llround(double(n_min) / spec.target_ratio));
    n_keep = std::min(n_keep, n_maj);

    Rng rng(spec.seed);
    std::vector<std::size_t> majority = cls.majority;
    rng.shuffle(majority);
    majority.resize(n_keep);

    std::vector<std::size_t> keep;
    keep.reserve(table.n_rows - (n_maj - n_keep));
    std::vector<std::uint8_t> drop(table.n_rows, 0);
    for (std::size_t r : cls.majority) drop[r] = 1;
    for (std::size_t r : majority) drop[r] = 0;
    for (std::size_t r = 0; r < table.n_rows; ++r) {
        if (!drop[r]) keep.push_back(r);
    }
    return table.select_rows(keep);
}

Table resample(const Table& table, const ResampleSpec& spec) {
    switch (spec.method) {
        case ResampleMethod::none: spec.validate(); return table;
        case ResampleMethod::smote: return smote(table, spec);
        case ResampleMethod::random_over: return random_over(table, spec);
        case ResampleMethod::random_under: return random_under(table, spec);
    }
    throw ConfigError("bad resample method value");
}

}  // namespace scml
