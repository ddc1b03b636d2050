#include "scml/explain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scml/parallel.hpp"

namespace scml {

using nlohmann::json;

json Attribution::to_json() const {
    return json{{"base_value", base_value},
                {"phi", phi},
                {"prediction", prediction},
                {"regularized", regularized}};
}

namespace {

constexpr std::size_t kExactCap = 14;

void check_inputs(const FittedModel& model, const std::vector<double>& instance,
                  const Matrix& background) {
    if (background.rows == 0) throw DataError("shapley needs a nonempty background sample");
    if (instance.size() != model.n_features)
        throw DataError("instance has " + std::to_string(instance.size()) +
                        " features but the model expects " + std::to_string(model.n_features));
    if (background.cols != model.n_features)
        throw DataError("background has " + std::to_string(background.cols) +
                        " features but the model expects " + std::to_string(model.n_features));
}

// Mean model score over the background with instance values spliced in on
// the coalition mask.
double coalition_value(const FittedModel& model, const std::vector<double>& instance,
                       const Matrix& background, std::uint32_t mask) {
    const std::size_t m = instance.size();
    std::vector<double> hybrid(m);
    double sum = 0;
    for (std::size_t b = 0; b < background.rows; ++b) {
        const double* row = background.row_ptr(b);
        for (std::size_t j = 0; j < m; ++j)
            hybrid[j] = (mask >> j) & 1u ? instance[j] : row[j];
        sum += model.model->score(hybrid.data(), m);
    }
    return sum / double(background.rows);
}

}  // namespace

Attribution shapley_exact(const FittedModel& model, const std::vector<double>& instance,
                          const Matrix& background) {
    check_inputs(model, instance, background);
    const std::size_t m = instance.size();
    if (m > kExactCap)
        throw ConfigError("exact shapley enumerates 2^M coalitions; M=" + std::to_string(m) +
                          " exceeds the cap of " + std::to_string(kExactCap));
    const std::size_t n_masks = std::size_t(1) << m;
    std::vector<double> value(n_masks);
    parallel_for(n_masks, [&](std::size_t mask) {
        value[mask] = coalition_value(model, instance, background, std::uint32_t(mask));
    });

    std::vector<double> factorial(m + 1, 1.0);
    for (std::size_t i = 1; i <= m; ++i) factorial[i] = factorial[i - 1] * double(i);

    Attribution a;
    a.base_value = value[0];
    a.prediction = value[n_masks - 1];
    a.phi.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const std::uint32_t bit = 1u << j;
        for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const std::size_t s = std::size_t(__builtin_popcount(mask));
            const double w = factorial[s] * factorial[m - s - 1] / factorial[m];
            a.phi[j] += w * (value[mask | bit] - value[mask]);
        }
    }
    return a;
}

Attribution kernel_shap(const FittedModel& model, const std::vector<double>& instance,
                        const Matrix& background, std::size_t n_coalitions,
                        std::uint64_t seed) {
    check_inputs(model, instance, background);
    const std::size_t m = instance.size();
    if (m < 2) throw ConfigError("kernel shap needs at least two features");
    if (n_coalitions < m + 2)
        throw ConfigError("kernel shap needs at least M+2 coalitions to identify M values");

    Attribution a;
    a.base_value = coalition_value(model, instance, background, 0);
    a.prediction = model.model->score(instance.data(), m);

    // proper nonempty coalitions: enumerate when the budget covers them all
    std::vector<std::uint32_t> masks;
    const bool small = m <= 20 && (std::size_t(1) << m) - 2 <= n_coalitions;
    if (small) {
        for (std::uint32_t mask = 1; mask + 1 < (1u << m); ++mask) masks.push_back(mask);
    } else {
        Rng rng(seed);
        masks.resize(n_coalitions);
        for (auto& mask : masks) {
            const std::size_t size = std::size_t(rng.uniform_int(1, std::int64_t(m) - 1));
            std::vector<std::size_t> picked = rng.permutation(m);
            mask = 0;
            for (std::size_t j = 0; j < size; ++j) mask |= 1u << picked[j];
        }
    }

    std::vector<double> values(masks.size());
    parallel_for(masks.size(), [&](std::size_t i) {
        values[i] = coalition_value(model, instance, background, masks[i]);
    });

    // kernel weight per coalition size
    std::vector<double> log_fact(m + 1, 0.0);
    for (std::size_t i = 1; i <= m; ++i) log_fact[i] = log_fact[i - 1] + std::log(double(i));
    auto kernel_weight = [&](std::size_t s) {
        const double log_choose = log_fact[m] - log_fact[s] - log_fact[m - s];
        return double(m - 1) / (std::exp(log_choose) * double(s) * double(m - s));
    };

    // WLS with the efficiency constraint folded in: phi_{m-1} is eliminated
    // via sum(phi) = prediction - base.
    const double delta = a.prediction - a.base_value;
    const std::size_t p = m - 1;
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(Eigen::Index(p), Eigen::Index(p));
    Eigen::VectorXd atb = Eigen::VectorXd::Zero(Eigen::Index(p));
    Eigen::VectorXd arow = Eigen::VectorXd::Zero(Eigen::Index(p));
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const std::uint32_t mask = masks[i];
        const double z_last = (mask >> (m - 1)) & 1u ? 1.0 : 0.0;
        for (std::size_t j = 0; j < p; ++j)
            arow(Eigen::Index(j)) = (((mask >> j) & 1u) ? 1.0 : 0.0) - z_last;
        const double target = values[i] - a.base_value - z_last * delta;
        const double w = kernel_weight(std::size_t(__builtin_popcount(mask)));
        ata.noalias() += w * arow * arow.transpose();
        atb.noalias() += w * arow * target;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
    if (lu.rank() < Eigen::Index(p)) {
        a.regularized = true;
        ata.diagonal().array() += 1e-10;
    }
    const Eigen::VectorXd head = ata.ldlt().solve(atb);
    a.phi.assign(m, 0.0);
    double head_sum = 0;
    for (std::size_t j = 0; j < p; ++j) {
        a.phi[j] = head(Eigen::Index(j));
        head_sum += a.phi[j];
    }
    a.phi[m - 1] = delta - head_sum;
    return a;
}

ExplainMethod explain_method_from_string(const std::string& s) {
    if (s == "exact") return ExplainMethod::exact;
    if (s == "kernel") return ExplainMethod::kernel;
    if (s == "auto") return ExplainMethod::auto_select;
    throw ConfigError("unknown explain method '" + s + "' (exact, kernel, auto)");
}

std::string to_string(ExplainMethod m) {
    switch (m) {
        case ExplainMethod::exact: return "exact";
        case ExplainMethod::kernel: return "kernel";
        case ExplainMethod::auto_select: return "auto";
    }
    return "auto";
}

json GlobalImportance::to_json() const {
    return json{{"values", values}, {"ranking", ranking}};
}

GlobalImportance global_importance(const FittedModel& model, const Matrix& sample,
                                   const Matrix& background, ExplainMethod method,
                                   std::size_t n_coalitions, std::uint64_t seed) {
    if (sample.rows == 0) throw DataError("global importance needs sample rows");
    const std::size_t m = model.n_features;
    ExplainMethod chosen = method;
    if (chosen == ExplainMethod::auto_select)
        chosen = m <= kExactCap ? ExplainMethod::exact : ExplainMethod::kernel;

    GlobalImportance gi;
    gi.values.assign(m, 0.0);
    for (std::size_t i = 0; i < sample.rows; ++i) {
        const std::vector<double> row = sample.row_copy(i);
        const Attribution a = chosen == ExplainMethod::exact
                                  ? shapley_exact(model, row, background)
                                  : kernel_shap(model, row, background, n_coalitions, seed + i);
        for (std::size_t j = 0; j < m; ++j) gi.values[j] += std::abs(a.phi[j]);
    }
    for (double& v : gi.values) v /= double(sample.rows);
    gi.ranking.resize(m);
    std::iota(gi.ranking.begin(), gi.ranking.end(), 0);
    std::stable_sort(gi.ranking.begin(), gi.ranking.end(),
                     [&](std::size_t a, std::size_t b) { return gi.values[a] > gi.values[b]; });
    return gi;
}

json force_plot_export(const Attribution& attribution,
                       const std::vector<std::string>& feature_names,
                       const std::vector<double>& feature_values) {
    if (feature_names.size() != attribution.phi.size() ||
        feature_values.size() != attribution.phi.size())
        throw DataError("force plot needs one name and value per attributed feature");
    std::vector<std::size_t> order(attribution.phi.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(attribution.phi[a]) > std::abs(attribution.phi[b]);
    });
    json negative = json::array(), positive = json::array();
    for (std::size_t j : order) {
        const double phi = attribution.phi[j];
        if (phi == 0.0) continue;
        json entry{{"feature", feature_names[j]}, {"value", feature_values[j]}, {"phi", phi}};
        (phi < 0 ? negative : positive).push_back(std::move(entry));
    }
    return json{{"base_value", attribution.base_value},
                {"prediction", attribution.prediction},
                {"negative", negative},
                {"positive", positive}};
}

std::string importance_to_svg(const GlobalImportance& importance,
                              const std::vector<std::string>& feature_names) {
    if (feature_names.size() != importance.values.size())
        throw DataError("importance plot needs one name per feature");
    const std::size_t n = importance.values.size();
    constexpr int kRowHeight = 26, kLeft = 150, kWidth = 560, kTop = 30;
    const int height = kTop + int(n) * kRowHeight + 10;
    double max_value = 0;
    for (double v : importance.values) max_value = std::max(max_value, v);
    if (max_value <= 0) max_value = 1;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << height << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2
        << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << "mean |SHAP value| per feature</text>\n";
    for (std::size_t rank = 0; rank < n; ++rank) {
        const std::size_t j = importance.ranking[rank];
        const double frac = importance.values[j] / max_value;
        const int y = kTop + int(rank) * kRowHeight;
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 15
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
            << feature_names[j] << "</text>\n"
            << "<rect x=\"" << kLeft << "\" y=\"" << y << "\" width=\""
            << frac * (kWidth - kLeft - 80) << "\" height=\"18\" fill=\"#d62728\"/>\n"
            << "<text x=\"" << kLeft + frac * (kWidth - kLeft - 80) + 5 << "\" y=\"" << y + 15
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(importance.values[j])
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace scml
