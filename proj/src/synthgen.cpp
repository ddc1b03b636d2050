#include "scml/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "scml/evaluate.hpp"

namespace scml {

using nlohmann::json;

DataShape shape_from_string(const std::string& s) {
    if (s == "fraud") return DataShape::fraud;
    if (s == "failure") return DataShape::failure;
    if (s == "backorder") return DataShape::backorder;
    throw ConfigError("unknown data shape '" + s + "' (fraud, failure, backorder)");
}

std::string to_string(DataShape shape) {
    switch (shape) {
        case DataShape::fraud: return "fraud";
        case DataShape::failure: return "failure";
        case DataShape::backorder: return "backorder";
    }
    return "backorder";
}

void GeneratorSpec::validate() const {
    if (n_rows < 1 || n_numeric < 1) throw ConfigError("generator needs n_rows and n_numeric >= 1");
    if (!(positive_rate > 0.0 && positive_rate <= 0.5))
        throw ConfigError("positive_rate must lie in (0, 0.5]");
    if (signal_strength < 0) throw ConfigError("signal_strength must be >= 0");
    if (noise < 0) throw ConfigError("noise must be >= 0");
    if (cardinalities.size() != n_categorical)
        throw ConfigError("expected " + std::to_string(n_categorical) +
                          " cardinalities, got " + std::to_string(cardinalities.size()));
    for (std::size_t c : cardinalities)
        if (c < 2) throw ConfigError("categorical features need cardinality >= 2");
    if (std::llround(positive_rate * double(n_rows)) < 1)
        throw ConfigError("positive_rate * n_rows rounds to zero positives");
}

json GeneratorSpec::to_json() const {
    return json{{"shape", to_string(shape)},
                {"n_rows", n_rows},
                {"n_numeric", n_numeric},
                {"n_categorical", n_categorical},
                {"cardinalities", cardinalities},
                {"positive_rate", positive_rate},
                {"signal_strength", signal_strength},
                {"noise", noise},
                {"seed", seed}};
}

GeneratorSpec GeneratorSpec::from_json(const json& j) {
    GeneratorSpec s;
    if (j.contains("shape")) s.shape = shape_from_string(j.at("shape").get<std::string>());
    s.n_rows = j.value("n_rows", s.n_rows);
    s.n_numeric = j.value("n_numeric", s.n_numeric);
    s.n_categorical = j.value("n_categorical", s.n_categorical);
    s.cardinalities = j.value("cardinalities", s.cardinalities);
    s.positive_rate = j.value("positive_rate", s.positive_rate);
    s.signal_strength = j.value("signal_strength", s.signal_strength);
    s.noise = j.value("noise", s.noise);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
}

GeneratorSpec default_generator(DataShape shape) {
    GeneratorSpec s;
    s.shape = shape;
    switch (shape) {
        case DataShape::fraud:
            s.n_rows = 20000;
            s.n_numeric = 8;
            s.n_categorical = 4;
            s.cardinalities = {4, 12, 20, 4};
            s.positive_rate = 0.02;
            break;
        case DataShape::failure:
            // 14 variables to match the machine-failure roster
            s.n_rows = 10000;
            s.n_numeric = 11;
            s.n_categorical = 3;
            s.cardinalities = {3, 5, 4};
            s.positive_rate = 0.03;
            break;
        case DataShape::backorder:
            s.n_rows = 20000;
            s.n_numeric = 12;
            s.n_categorical = 3;
            s.cardinalities = {2, 2, 2};
            s.positive_rate = 0.05;
            break;
    }
    return s;
}

namespace {

struct ShapeNames {
    std::vector<std::string> numeric, categorical;
    std::string target;
};

ShapeNames shape_names(DataShape shape) {
    switch (shape) {
        case DataShape::fraud:
            return {{"amount", "balance_delta", "txn_hour", "velocity", "avg_amount_30d",
                     "merchant_risk", "geo_distance", "account_age"},
                    {"channel", "card_type", "merchant_category", "country"},
                    "is_fraud"};
        case DataShape::failure:
            return {{"air_temp", "process_temp", "rot_speed", "torque", "tool_wear", "vibration",
                     "pressure", "humidity", "power", "cycle_time", "load"},
                    {"type", "line", "shift"},
                    "failure"};
        case DataShape::backorder:
            return {{"national_inv", "lead_time", "in_transit_qty", "forecast_3m", "forecast_6m",
                     "forecast_9m", "sales_1m", "sales_3m", "sales_6m", "sales_9m", "min_bank",
                     "pieces_past_due"},
                    {"potential_issue", "deck_risk", "oe_constraint"},
                    "went_on_backorder"};
    }
    return {{}, {}, "label"};
}

struct GenParams {
    std::vector<double> offset, scale;             // per numeric feature
    double delta = 0;                              // pre-scale mean separation per feature
    double sigma = 1;                              // pre-scale standard deviation
    std::vector<std::vector<double>> p0, p1;       // per categorical feature
};

// All distribution parameters come from their own stream so row generation
// cannot disturb them.
GenParams derive_params(const GeneratorSpec& spec) {
    Rng rng(spec.seed);
    GenParams p;
    p.delta = spec.signal_strength / std::sqrt(double(spec.n_numeric));
    p.sigma = 1.0 + spec.noise;
    for (std::size_t j = 0; j < spec.n_numeric; ++j) {
        p.offset.push_back(2.0 * rng.normal());
        p.scale.push_back(0.5 + 1.5 * rng.uniform01());
    }
    const double tilt = 0.25 * spec.signal_strength;
    for (std::size_t f = 0; f < spec.n_categorical; ++f) {
        const std::size_t k = spec.cardinalities[f];
        std::vector<double> base(k), tilted(k);
        double bsum = 0, tsum = 0;
        for (std::size_t c = 0; c < k; ++c) {
            base[c] = 0.2 + rng.uniform01();
            bsum += base[c];
            tilted[c] = base[c] * std::exp(tilt * (2.0 * rng.uniform01() - 1.0));
            tsum += tilted[c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            base[c] /= bsum;
            tilted[c] /= tsum;
        }
        p.p0.push_back(std::move(base));
        p.p1.push_back(std::move(tilted));
    }
    return p;
}

std::size_t sample_category(const std::vector<double>& probs, double u) {
    double acc = 0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        acc += probs[c];
        if (u < acc) return c;
    }
    return probs.size() - 1;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

Table generate(const GeneratorSpec& spec) {
    spec.validate();
    const GenParams params = derive_params(spec);
    const ShapeNames names = shape_names(spec.shape);

    const std::size_t n_pos = std::size_t(std::llround(spec.positive_rate * double(spec.n_rows)));
    std::vector<double> labels(spec.n_rows, 0.0);
    std::fill(labels.begin(), labels.begin() + std::ptrdiff_t(n_pos), 1.0);
    Rng rng(spec.seed + 1);
    rng.shuffle(labels);

    std::vector<std::vector<double>> numeric(spec.n_numeric,
                                             std::vector<double>(spec.n_rows));
    std::vector<std::vector<std::string>> categorical(spec.n_categorical,
                                                      std::vector<std::string>(spec.n_rows));
    for (std::size_t i = 0; i < spec.n_rows; ++i) {
        const bool pos = labels[i] == 1.0;
        for (std::size_t j = 0; j < spec.n_numeric; ++j) {
            const double mean = (pos ? 0.5 : -0.5) * params.delta;
            numeric[j][i] = params.offset[j] +
                            params.scale[j] * (mean + params.sigma * rng.normal());
        }
        for (std::size_t f = 0; f < spec.n_categorical; ++f) {
            const auto& probs = pos ? params.p1[f] : params.p0[f];
            const std::size_t c = sample_category(probs, rng.uniform01());
            categorical[f][i] = "v" + std::to_string(c);
        }
    }

    Table t;
    t.n_rows = spec.n_rows;
    for (std::size_t j = 0; j < spec.n_numeric; ++j) {
        const std::string name =
            j < names.numeric.size() ? names.numeric[j] : "f" + std::to_string(j);
        t.columns.push_back(Column::make_numeric(name, std::move(numeric[j])));
    }
    for (std::size_t f = 0; f < spec.n_categorical; ++f) {
        const std::string name =
            f < names.categorical.size() ? names.categorical[f] : "c" + std::to_string(f);
        t.columns.push_back(Column::make_categorical(name, categorical[f]));
    }
    t.columns.push_back(Column::make_numeric(names.target, std::move(labels)));
    t.target_index = t.columns.size() - 1;
    t.label_names = {"no", "yes"};
    t.check_consistent();
    return t;
}

double bayes_optimal_auroc(const GeneratorSpec& spec, std::size_t n_mc) {
    spec.validate();
    const GenParams params = derive_params(spec);
    // d: Mahalanobis distance between the class-conditional Gaussians
    const double d = spec.signal_strength / (1.0 + spec.noise);
    if (spec.n_categorical == 0) return normal_cdf(d / std::sqrt(2.0));

    // Monte Carlo on the exact log-likelihood ratio; the numeric block
    // contributes N(+-d^2/2, d^2), each categorical feature its discrete LLR.
    Rng rng(spec.seed ^ 0x5DEECE66Dull);
    std::vector<int> y;
    std::vector<double> llr;
    y.reserve(2 * n_mc);
    llr.reserve(2 * n_mc);
    for (std::size_t cls = 0; cls < 2; ++cls) {
        for (std::size_t i = 0; i < n_mc; ++i) {
            double v = d == 0 ? 0.0 : (cls ? 0.5 : -0.5) * d * d + d * rng.normal();
            for (std::size_t f = 0; f < spec.n_categorical; ++f) {
                const auto& probs = cls ? params.p1[f] : params.p0[f];
                const std::size_t c = sample_category(probs, rng.uniform01());
                v += std::log(params.p1[f][c] / params.p0[f][c]);
            }
            y.push_back(int(cls));
            llr.push_back(v);
        }
    }
    return roc_auc(y, llr).second;
}

}  // namespace scml
