#include "scml/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scml {

namespace {

void check_xy(const Matrix& x, const std::vector<double>& y) {
    if (x.rows != y.size()) throw DataError("feature matrix and target length mismatch");
    if (x.rows == 0 || x.cols == 0) throw DataError("empty feature matrix");
    for (double v : x.data) {
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw DataError("non-finite target value");
    }
}

std::vector<std::size_t> top_k_support(const std::vector<double>& scores, std::size_t top_k) {
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (top_k > scores.size())
        throw ConfigError("top_k exceeds the number of features (" +
                          std::to_string(scores.size()) + ")");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    // ties keep ascending feature index
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(top_k);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace

SelectMethod select_method_from_string(const std::string& s) {
    if (s == "lasso") return SelectMethod::lasso;
    if (s == "pearson") return SelectMethod::pearson;
    if (s == "chi2") return SelectMethod::chi2;
    throw ConfigError("unknown selection method: " + s);
}

std::string to_string(SelectMethod m) {
    switch (m) {
        case SelectMethod::lasso: return "lasso";
        case SelectMethod::pearson: return "pearson";
        case SelectMethod::chi2: return "chi2";
    }
    throw ConfigError("bad selection method value");
}

nlohmann::json SelectionResult::to_json() const {
    nlohmann::json j{{"method", to_string(method)},
                     {"scores", scores},
                     {"support", support},
                     {"converged", converged}};
    if (method == SelectMethod::lasso) {
        j["lambda"] = lambda;
        j["weights"] = weights;
    }
    return j;
}

SelectionResult SelectionResult::from_json(const nlohmann::json& j) {
    SelectionResult r;
    r.method = select_method_from_string(j.at("method"));
    r.scores = j.at("scores").get<std::vector<double>>();
    r.support = j.at("support").get<std::vector<std::size_t>>();
    r.converged = j.value("converged", true);
    r.lambda = j.value("lambda", 0.0);
    if (j.contains("weights")) r.weights = j.at("weights").get<std::vector<double>>();
    return r;
}

Matrix feature_matrix(const Table& table) {
    const auto features = table.feature_indices();
    Matrix x(table.n_rows, features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        const Column& col = table.columns[features[j]];
        if (col.kind != ColumnKind::numeric)
            throw DataError("feature column '" + col.name + "' is not numeric; encode it first");
        for (std::size_t i = 0; i < table.n_rows; ++i) x(i, j) = col.numeric[i];
    }
    return x;
}

SelectionResult pearson_filter(const Matrix& x, const std::vector<double>& y, std::size_t top_k) {
    check_xy(x, y);
    const std::size_t n = x.rows;
    double y_mean = 0;
    for (double v : y) y_mean += v;
    y_mean /= double(n);
    double y_var = 0;
    for (double v : y) y_var += (v - y_mean) * (v - y_mean);

    SelectionResult r;
    r.method = SelectMethod::pearson;
    r.scores.resize(x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) {
        double x_mean = 0;
        for (std::size_t i = 0; i < n; ++i) x_mean += x(i, j);
        x_mean /= double(n);
        double x_var = 0, cov = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = x(i, j) - x_mean;
            x_var += dx * dx;
            cov += dx * (y[i] - y_mean);
        }
        const double denom = std::sqrt(x_var * y_var);
        r.scores[j] = denom > 0 ? std::abs(cov) / denom : 0.0;
    }
    r.support = top_k_support(r.scores, top_k);
    return r;
}

SelectionResult chi2_filter(const Matrix& x, const std::vector<double>& y, std::size_t top_k) {
    check_xy(x, y);
    const std::size_t n = x.rows;
    std::array<std::size_t, 2> class_count{0, 0};
    for (double v : y) {
        if (v != 0.0 && v != 1.0) throw DataError("chi2_filter needs 0/1 labels");
        ++class_count[v == 1.0 ? 1 : 0];
    }
    if (class_count[0] == 0 || class_count[1] == 0)
        throw DataError("chi2_filter needs both classes present");

    SelectionResult r;
    r.method = SelectMethod::chi2;
    r.scores.resize(x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) {
        double max_v = 0;
        std::array<double, 2> present{0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x(i, j);
            if (v < 0) throw DataError("chi2_filter needs non-negative features");
            max_v = std::max(max_v, v);
            present[y[i] == 1.0 ? 1 : 0] += v;
        }
        if (max_v == 0) {
            r.scores[j] = 0.0;
            continue;
        }
        // 2x2 table: per class, observed sum vs. its complement against the
        // maximum attainable sum n_c * max_v
        std::array<double, 2> absent{double(class_count[0]) * max_v - present[0],
                                     double(class_count[1]) * max_v - present[1]};
        const double row_p = present[0] + present[1];
        const double row_a = absent[0] + absent[1];
        const double total = row_p + row_a;
        double stat = 0;
        for (int c = 0; c < 2; ++c) {
            const double col_total = double(class_count[c]) * max_v;
            const double ep = row_p * col_total / total;
            const double ea = row_a * col_total / total;
            if (ep > 0) stat += (present[c] - ep) * (present[c] - ep) / ep;
            if (ea > 0) stat += (absent[c] - ea) * (absent[c] - ea) / ea;
        }
        r.scores[j] = stat;
    }
    r.support = top_k_support(r.scores, top_k);
    return r;
}

double lasso_lambda_max(const Matrix& x, const std::vector<double>& y) {
    check_xy(x, y);
    double y_mean = 0;
    for (double v : y) y_mean += v;
    y_mean /= double(y.size());
    double best = 0;
    for (std::size_t j = 0; j < x.cols; ++j) {
        double dot = 0;
        for (std::size_t i = 0; i < x.rows; ++i) dot += x(i, j) * (y[i] - y_mean);
        best = std::max(best, std::abs(dot) / double(x.rows));
    }
    return best;
}

SelectionResult lasso_fit(const Matrix& x, const std::vector<double>& y, double lambda,
                          double tol, std::size_t max_iter) {
    check_xy(x, y);
    if (lambda < 0) throw ConfigError("lambda must be >= 0");
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;

    // center y; features are assumed standardized by the caller
    double y_mean = 0;
    for (double v : y) y_mean += v;
    y_mean /= double(n);

    std::vector<double> w(d, 0.0);
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - y_mean;

    std::vector<double> col_norm(d);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += x(i, j) * x(i, j);
        col_norm[j] = s / double(n);
    }

    auto objective = [&] {
        double sse = 0;
        for (double r : residual) sse += r * r;
        double l1 = 0;
        for (double v : w) l1 += std::abs(v);
        return sse / (2.0 * double(n)) + lambda * l1;
    };

    SelectionResult r;
    r.method = SelectMethod::lasso;
    r.lambda = lambda;
    r.converged = false;
    r.objective_path.push_back(objective());

    for (std::size_t sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0;
        for (std::size_t j = 0; j < d; ++j) {
            if (col_norm[j] == 0.0) continue;
            double z = 0;
            for (std::size_t i = 0; i < n; ++i) z += x(i, j) * residual[i];
            z = z / double(n) + col_norm[j] * w[j];
            const double w_new = std::copysign(std::max(std::abs(z) - lambda, 0.0), z) /
                                 col_norm[j];
            const double delta = w_new - w[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * x(i, j);
                w[j] = w_new;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        r.objective_path.push_back(objective());
        if (max_delta < tol) {
            r.converged = true;
            break;
        }
    }

    r.weights = w;
    r.scores.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        r.scores[j] = std::abs(w[j]);
        if (w[j] != 0.0) r.support.push_back(j);
    }
    return r;
}

Table apply_selection(const SelectionResult& result, const Table& table) {
    if (result.support.empty())
        throw DataError("selection produced an empty support; nothing to model");
    const auto features = table.feature_indices();
    Table out;
    out.n_rows = table.n_rows;
    out.label_names = table.label_names;
    for (std::size_t idx : result.support) {
        if (idx >= features.size())
            throw DataError("selection support index " + std::to_string(idx) +
                            " is out of range for this table");
        out.columns.push_back(table.columns[features[idx]]);
    }
    if (table.has_target()) {
        out.columns.push_back(table.columns[*table.target_index]);
        out.target_index = out.columns.size() - 1;
    }
    out.check_consistent();
    return out;
}

}  // namespace scml
