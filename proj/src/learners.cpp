#include "scml/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace scml {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Matrix subset_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = x.row_ptr(rows[i]);
        std::copy(src, src + x.cols, out.data.begin() + static_cast<std::ptrdiff_t>(i * x.cols));
    }
    return out;
}

std::vector<double> subset(const std::vector<double>& v, const std::vector<std::size_t>& rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
    return out;
}

// ---------------------------------------------------------------------------
// CART tree shared by the single tree, bagging, forests, and boosting.

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_row(const double* x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            i = x[n.feature] < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    int leaf_for_row(const double* x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            i = x[n.feature] < n.threshold ? n.left : n.right;
        }
        return i;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const TreeNode& n : nodes) {
            arr.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        }
        return arr;
    }

    static Tree from_json(const nlohmann::json& arr) {
        Tree t;
        for (const auto& e : arr) {
            t.nodes.push_back({e.at(0), e.at(1), e.at(2), e.at(3), e.at(4)});
        }
        return t;
    }
};

enum class SplitCriterion { gini, mse };

struct TreeConfig {
    std::size_t max_depth = 32;
    std::size_t min_samples_leaf = 1;
    std::size_t mtry = 0;  // 0 means all features
};

struct TreeBuilder {
    const Matrix& x;
    const std::vector<double>& t;  // 0/1 labels or regression targets
    const std::vector<double>& w;
    TreeConfig cfg;
    SplitCriterion crit;
    Rng* rng;
    Tree tree;

    int build(std::vector<std::size_t>& rows, std::size_t depth) {
        double sw = 0, swt = 0;
        double tmin = t[rows[0]], tmax = t[rows[0]];
        for (std::size_t r : rows) {
            sw += w[r];
            swt += w[r] * t[r];
            tmin = std::min(tmin, t[r]);
            tmax = std::max(tmax, t[r]);
        }
        const double mean = swt / sw;

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.back().value = mean;

        const bool pure = tmin == tmax;
        if (pure || depth >= cfg.max_depth || rows.size() < 2 * cfg.min_samples_leaf) {
            return node_id;
        }

        std::vector<std::size_t> features;
        if (cfg.mtry > 0 && cfg.mtry < x.cols && rng) {
            auto perm = rng->permutation(x.cols);
            features.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cfg.mtry));
            std::sort(features.begin(), features.end());
        } else {
            features.resize(x.cols);
            std::iota(features.begin(), features.end(), 0);
        }

        // a valid split minimizing the weighted child impurity; first hit in
        // (feature asc, threshold asc) order wins ties via strict comparison
        int best_feature = -1;
        double best_threshold = 0;
        double best_score = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, std::size_t>> order(rows.size());

        for (std::size_t f : features) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                order[i] = {x(rows[i], f), rows[i]};
            }
            std::sort(order.begin(), order.end());
            double lw = 0, lwt = 0, lwt2 = 0;
            double rw = sw, rwt = swt, rwt2 = 0;
            if (crit == SplitCriterion::mse) {
                for (std::size_t r : rows) rwt2 += w[r] * t[r] * t[r];
            }
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const std::size_t r = order[i].second;
                lw += w[r];
                lwt += w[r] * t[r];
                rw -= w[r];
                rwt -= w[r] * t[r];
                if (crit == SplitCriterion::mse) {
                    lwt2 += w[r] * t[r] * t[r];
                    rwt2 -= w[r] * t[r] * t[r];
                }
                if (order[i].first == order[i + 1].first) continue;
                if (i + 1 < cfg.min_samples_leaf || rows.size() - i - 1 < cfg.min_samples_leaf)
                    continue;
                if (lw <= 0 || rw <= 0) continue;
                double score;
                if (crit == SplitCriterion::gini) {
                    const double pl = lwt / lw, pr = rwt / rw;
                    score = lw * 2.0 * pl * (1.0 - pl) + rw * 2.0 * pr * (1.0 - pr);
                } else {
                    score = (lwt2 - lwt * lwt / lw) + (rwt2 - rwt * rwt / rw);
                }
                if (score < best_score) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = (order[i].first + order[i + 1].first) / 2.0;
                }
            }
        }

        if (best_feature < 0) return node_id;

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) {
            (x(r, static_cast<std::size_t>(best_feature)) < best_threshold ? left : right)
                .push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        tree.nodes[static_cast<std::size_t>(node_id)].left = l;
        tree.nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

Tree fit_tree(const Matrix& x, const std::vector<double>& t, const std::vector<double>& w,
              const TreeConfig& cfg, SplitCriterion crit, Rng* rng = nullptr) {
    TreeBuilder b{x, t, w, cfg, crit, rng, {}};
    std::vector<std::size_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), 0);
    b.build(rows, 0);
    return b.tree;
}

// ---------------------------------------------------------------------------
// Concrete models.

struct LogisticModel : Model {
    std::vector<double> w;
    double b = 0;

    double score(const double* x, std::size_t d) const override {
        double z = b;
        for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
        return sigmoid(z);
    }
    nlohmann::json to_json() const override {
        return {{"kind", "logistic_regression"}, {"w", w}, {"b", b}};
    }
};

struct TreeModel : Model {
    Tree tree;

    double score(const double* x, std::size_t) const override { return tree.predict_row(x); }
    nlohmann::json to_json() const override {
        return {{"kind", "decision_tree"}, {"tree", tree.to_json()}};
    }
};

struct TreeEnsembleModel : Model {
    std::string kind;  // bagging | random_forest
    std::vector<Tree> trees;
    bool vote = false;  // vote fraction (bagging) vs mean probability (forest)

    double score(const double* x, std::size_t) const override {
        double s = 0;
        for (const Tree& t : trees) {
            const double p = t.predict_row(x);
            s += vote ? (p >= 0.5 ? 1.0 : 0.0) : p;
        }
        return s / double(trees.size());
    }
    nlohmann::json to_json() const override {
        nlohmann::json ts = nlohmann::json::array();
        for (const Tree& t : trees) ts.push_back(t.to_json());
        return {{"kind", kind}, {"trees", ts}, {"vote", vote}};
    }
};

struct BoostModel : Model {
    std::string kind;  // adaboost | rusboost
    std::vector<Tree> trees;
    std::vector<double> alphas;

    double score(const double* x, std::size_t) const override {
        if (trees.empty()) return 0.5;
        double f = 0;
        for (std::size_t t = 0; t < trees.size(); ++t) {
            f += alphas[t] * (trees[t].predict_row(x) >= 0.5 ? 1.0 : -1.0);
        }
        return sigmoid(2.0 * f);
    }
    nlohmann::json to_json() const override {
        nlohmann::json ts = nlohmann::json::array();
        for (const Tree& t : trees) ts.push_back(t.to_json());
        return {{"kind", kind}, {"trees", ts}, {"alphas", alphas}};
    }
};

struct GradientBoostingModel : Model {
    double f0 = 0;
    double learning_rate = 0.1;
    std::vector<Tree> trees;

    double raw(const double* x) const {
        double f = f0;
        for (const Tree& t : trees) f += learning_rate * t.predict_row(x);
        return f;
    }
    double score(const double* x, std::size_t) const override { return sigmoid(raw(x)); }
    nlohmann::json to_json() const override {
        nlohmann::json ts = nlohmann::json::array();
        for (const Tree& t : trees) ts.push_back(t.to_json());
        return {{"kind", "gradient_boosting"},
                {"f0", f0},
                {"learning_rate", learning_rate},
                {"trees", ts}};
    }
};

struct GaussianNbModel : Model {
    double log_prior0 = 0, log_prior1 = 0;
    std::vector<double> mean0, var0, mean1, var1;

    double score(const double* x, std::size_t d) const override {
        double ll0 = log_prior0, ll1 = log_prior1;
        for (std::size_t j = 0; j < d; ++j) {
            const double d0 = x[j] - mean0[j], d1 = x[j] - mean1[j];
            ll0 -= 0.5 * (std::log(2.0 * M_PI * var0[j]) + d0 * d0 / var0[j]);
            ll1 -= 0.5 * (std::log(2.0 * M_PI * var1[j]) + d1 * d1 / var1[j]);
        }
        return sigmoid(ll1 - ll0);
    }
    nlohmann::json to_json() const override {
        return {{"kind", "gaussian_nb"}, {"log_prior0", log_prior0}, {"log_prior1", log_prior1},
                {"mean0", mean0},        {"var0", var0},             {"mean1", mean1},
                {"var1", var1}};
    }
};

struct KnnModel : Model {
    std::size_t k = 5;
    Matrix train;
    std::vector<double> labels;

    double score(const double* x, std::size_t d) const override {
        std::vector<std::pair<double, std::size_t>> dist(train.rows);
        for (std::size_t i = 0; i < train.rows; ++i) {
            dist[i] = {squared_distance(x, train.row_ptr(i), d), i};
        }
        const std::size_t kk = std::min(k, train.rows);
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk),
                          dist.end());
        double pos = 0;
        for (std::size_t i = 0; i < kk; ++i) pos += labels[dist[i].second];
        return pos / double(kk);
    }
    nlohmann::json to_json() const override {
        return {{"kind", "knn"},
                {"k", k},
                {"rows", train.rows},
                {"cols", train.cols},
                {"data", train.data},
                {"labels", labels}};
    }
};

struct LinearSvmModel : Model {
    std::vector<double> w;
    double b = 0;
    double platt_a = 1, platt_b = 0;

    double margin(const double* x, std::size_t d) const {
        double m = b;
        for (std::size_t j = 0; j < d; ++j) m += w[j] * x[j];
        return m;
    }
    double score(const double* x, std::size_t d) const override {
        return sigmoid(platt_a * margin(x, d) + platt_b);
    }
    nlohmann::json to_json() const override {
        return {{"kind", "linear_svm"},
                {"w", w},
                {"b", b},
                {"platt_a", platt_a},
                {"platt_b", platt_b}};
    }
};

struct MlpModel : Model {
    std::size_t hidden = 32;
    std::size_t d = 0;
    std::vector<double> params;

    double score(const double* x, std::size_t dim) const override {
        const double* w1 = params.data();
        const double* b1 = w1 + hidden * d;
        const double* w2 = b1 + hidden;
        const double b2 = params[hidden * d + hidden + hidden];
        double z = b2;
        for (std::size_t h = 0; h < hidden; ++h) {
            double a = b1[h];
            for (std::size_t j = 0; j < dim; ++j) a += w1[h * d + j] * x[j];
            z += w2[h] * std::tanh(a);
        }
        return sigmoid(z);
    }
    nlohmann::json to_json() const override {
        return {{"kind", "mlp"}, {"hidden", hidden}, {"d", d}, {"params", params}};
    }
};

struct KmeansAnomalyModel : Model {
    Matrix centroids;
    double dist_min = 0, dist_max = 1;

    double nearest(const double* x, std::size_t d) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.rows; ++c) {
            best = std::min(best, squared_distance(x, centroids.row_ptr(c), d));
        }
        return std::sqrt(best);
    }
    double score(const double* x, std::size_t d) const override {
        if (dist_max <= dist_min) return 0.5;
        const double v = (nearest(x, d) - dist_min) / (dist_max - dist_min);
        return std::clamp(v, 0.0, 1.0);
    }
    nlohmann::json to_json() const override {
        return {{"kind", "kmeans_anomaly"},
                {"k", centroids.rows},
                {"cols", centroids.cols},
                {"centroids", centroids.data},
                {"dist_min", dist_min},
                {"dist_max", dist_max}};
    }
};

// ---------------------------------------------------------------------------
// Fitters.

std::shared_ptr<const Model> fit_logistic(const LearnerSpec& spec, const Matrix& x,
                                          const std::vector<double>& y) {
    const double l2 = spec.param("l2", 1e-6);
    const std::size_t max_iter = std::size_t(spec.param("max_iter", 100));
    const double tol = spec.param("tol", 1e-10);
    const std::size_t n = x.rows, d = x.cols;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d + 1));
    Eigen::MatrixXd xe(n, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) xe(Eigen::Index(i), Eigen::Index(j)) = x(i, j);
        xe(Eigen::Index(i), Eigen::Index(d)) = 1.0;
    }

    for (std::size_t it = 0; it < max_iter; ++it) {
        Eigen::VectorXd z = xe * w;
        Eigen::VectorXd p(z.size()), s(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            p(i) = sigmoid(z(i));
            s(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
        }
        Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (p(Eigen::Index(i)) - y[i]) / double(n);
            g += r * xe.row(Eigen::Index(i)).transpose();
        }
        for (std::size_t j = 0; j < d; ++j) g(Eigen::Index(j)) += l2 * w(Eigen::Index(j));

        Eigen::MatrixXd h = xe.transpose() * s.asDiagonal() * xe / double(n);
        for (std::size_t j = 0; j < d; ++j) h(Eigen::Index(j), Eigen::Index(j)) += l2;
        for (Eigen::Index j = 0; j < h.rows(); ++j) h(j, j) += 1e-12;

        Eigen::VectorXd step = h.ldlt().solve(g);
        w -= step;
        if (step.lpNorm<Eigen::Infinity>() < tol) break;
    }

    auto m = std::make_shared<LogisticModel>();
    m->w.assign(w.data(), w.data() + d);
    m->b = w(Eigen::Index(d));
    return m;
}

std::shared_ptr<const Model> fit_decision_tree(const LearnerSpec& spec, const Matrix& x,
                                               const std::vector<double>& y) {
    TreeConfig cfg;
    cfg.max_depth = std::size_t(spec.param("max_depth", 32));
    cfg.min_samples_leaf = std::size_t(spec.param("min_samples_leaf", 1));
    std::vector<double> w(x.rows, 1.0);
    auto m = std::make_shared<TreeModel>();
    m->tree = fit_tree(x, y, w, cfg, SplitCriterion::gini);
    return m;
}

std::shared_ptr<const Model> fit_tree_ensemble(const LearnerSpec& spec, const Matrix& x,
                                               const std::vector<double>& y, bool forest) {
    TreeConfig cfg;
    cfg.max_depth = std::size_t(spec.param("max_depth", 32));
    cfg.min_samples_leaf = std::size_t(spec.param("min_samples_leaf", 1));
    const std::size_t n_estimators = std::size_t(spec.param("n_estimators", forest ? 100 : 50));
    if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
    const bool bootstrap = spec.param("bootstrap", 1) != 0;
    if (forest) {
        const std::size_t default_mtry =
            std::size_t(std::ceil(std::sqrt(double(x.cols))));
        cfg.mtry = std::size_t(spec.param("mtry", double(default_mtry)));
    }

    auto m = std::make_shared<TreeEnsembleModel>();
    m->kind = forest ? "random_forest" : "bagging";
    m->vote = !forest;
    std::vector<double> w(x.rows, 1.0);
    for (std::size_t t = 0; t < n_estimators; ++t) {
        Rng rng(spec.seed + t);
        if (bootstrap) {
            std::vector<std::size_t> rows(x.rows);
            for (std::size_t i = 0; i < x.rows; ++i) {
                rows[i] = std::size_t(rng.uniform_int(0, std::int64_t(x.rows) - 1));
            }
            Matrix xb = subset_rows(x, rows);
            std::vector<double> yb = subset(y, rows);
            m->trees.push_back(fit_tree(xb, yb, w, cfg, SplitCriterion::gini, &rng));
        } else {
            m->trees.push_back(fit_tree(x, y, w, cfg, SplitCriterion::gini, &rng));
        }
    }
    return m;
}

std::shared_ptr<const Model> fit_boost(const LearnerSpec& spec, const Matrix& x,
                                       const std::vector<double>& y, bool rus) {
    TreeConfig cfg;
    cfg.max_depth = std::size_t(spec.param("max_depth", 1));
    cfg.min_samples_leaf = std::size_t(spec.param("min_samples_leaf", 1));
    const std::size_t rounds = std::size_t(spec.param("n_estimators", 50));
    const std::size_t n = x.rows;

    auto m = std::make_shared<BoostModel>();
    m->kind = rus ? "rusboost" : "adaboost";
    std::vector<double> w(n, 1.0 / double(n));
    Rng rng(spec.seed);

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1.0 ? pos : neg).push_back(i);

    for (std::size_t t = 0; t < rounds; ++t) {
        Tree tree;
        if (rus) {
            // undersample the majority class to a 1:1 ratio, then train the
            // weak learner on that subsample with the current weights
            const auto& minority = pos.size() <= neg.size() ? pos : neg;
            auto majority = pos.size() <= neg.size() ? neg : pos;
            rng.shuffle(majority);
            majority.resize(std::min(majority.size(), minority.size()));
            std::vector<std::size_t> rows = minority;
            rows.insert(rows.end(), majority.begin(), majority.end());
            std::sort(rows.begin(), rows.end());
            Matrix xs = subset_rows(x, rows);
            std::vector<double> ys = subset(y, rows), ws = subset(w, rows);
            double sw = 0;
            for (double v : ws) sw += v;
            for (double& v : ws) v /= sw;
            tree = fit_tree(xs, ys, ws, cfg, SplitCriterion::gini);
        } else {
            tree = fit_tree(x, y, w, cfg, SplitCriterion::gini);
        }

        double err = 0;
        std::vector<double> h(n);
        for (std::size_t i = 0; i < n; ++i) {
            h[i] = tree.predict_row(x.row_ptr(i)) >= 0.5 ? 1.0 : -1.0;
            if (h[i] != 2.0 * y[i] - 1.0) err += w[i];
        }
        // a weak learner no better than chance ends boosting
        if (err >= 0.5) break;
        const double eps = std::max(err, 1e-12);
        const double alpha = 0.5 * std::log((1.0 - eps) / eps);
        m->trees.push_back(tree);
        m->alphas.push_back(alpha);
        if (err <= 1e-12) break;

        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(-alpha * (2.0 * y[i] - 1.0) * h[i]);
            sum += w[i];
        }
        for (double& v : w) v /= sum;
    }
    return m;
}

std::shared_ptr<const Model> fit_gradient_boosting(const LearnerSpec& spec, const Matrix& x,
                                                   const std::vector<double>& y,
                                                   std::vector<double>* loss_path) {
    TreeConfig cfg;
    cfg.max_depth = std::size_t(spec.param("max_depth", 3));
    cfg.min_samples_leaf = std::size_t(spec.param("min_samples_leaf", 1));
    const std::size_t rounds = std::size_t(spec.param("n_rounds", 100));
    const double lr = spec.param("learning_rate", 0.1);
    const std::size_t n = x.rows;

    double p_bar = 0;
    for (double v : y) p_bar += v;
    p_bar = std::clamp(p_bar / double(n), 1e-12, 1.0 - 1e-12);

    auto m = std::make_shared<GradientBoostingModel>();
    m->f0 = std::log(p_bar / (1.0 - p_bar));
    m->learning_rate = lr;

    std::vector<double> f(n, m->f0);
    std::vector<double> unit(n, 1.0);
    auto loss = [&] {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sign = 2.0 * y[i] - 1.0;
            s += log1pexp(-sign * f[i]);
        }
        return s / double(n);
    };
    if (loss_path) loss_path->push_back(loss());

    std::vector<double> residual(n);
    for (std::size_t t = 0; t < rounds; ++t) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = sigmoid(f[i]);
            residual[i] = y[i] - p[i];
        }
        Tree tree = fit_tree(x, residual, unit, cfg, SplitCriterion::mse);

        // Newton leaf values: sum of residuals over sum of hessians per leaf
        std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
        std::vector<int> leaf(n);
        for (std::size_t i = 0; i < n; ++i) {
            leaf[i] = tree.leaf_for_row(x.row_ptr(i));
            num[std::size_t(leaf[i])] += residual[i];
            den[std::size_t(leaf[i])] += p[i] * (1.0 - p[i]);
        }
        for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd) {
            if (tree.nodes[nd].feature < 0) {
                tree.nodes[nd].value = num[nd] / std::max(den[nd], 1e-12);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += lr * tree.nodes[std::size_t(leaf[i])].value;
        }
        m->trees.push_back(std::move(tree));
        if (loss_path) loss_path->push_back(loss());
    }
    return m;
}

std::shared_ptr<const Model> fit_gaussian_nb(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.rows, d = x.cols;
    auto m = std::make_shared<GaussianNbModel>();
    m->mean0.assign(d, 0);
    m->var0.assign(d, 0);
    m->mean1.assign(d, 0);
    m->var1.assign(d, 0);
    double n0 = 0, n1 = 0;
    for (double v : y) (v == 1.0 ? n1 : n0) += 1.0;
    m->log_prior0 = std::log(n0 / double(n));
    m->log_prior1 = std::log(n1 / double(n));
    for (std::size_t i = 0; i < n; ++i) {
        auto& mean = y[i] == 1.0 ? m->mean1 : m->mean0;
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) {
        m->mean0[j] /= n0;
        m->mean1[j] /= n1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& mean = y[i] == 1.0 ? m->mean1 : m->mean0;
        auto& var = y[i] == 1.0 ? m->var1 : m->var0;
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = x(i, j) - mean[j];
            var[j] += dv * dv;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        m->var0[j] = std::max(m->var0[j] / n0, 1e-9);
        m->var1[j] = std::max(m->var1[j] / n1, 1e-9);
    }
    return m;
}

std::shared_ptr<const Model> fit_knn(const LearnerSpec& spec, const Matrix& x,
                                     const std::vector<double>& y) {
    auto m = std::make_shared<KnnModel>();
    m->k = std::size_t(spec.param("k", 5));
    if (m->k < 1) throw ConfigError("k must be >= 1");
    m->train = x;
    m->labels = y;
    return m;
}

void fit_platt(const std::vector<double>& margins, const std::vector<double>& y, double& a,
               double& b) {
    double np = 0, nn = 0;
    for (double v : y) (v == 1.0 ? np : nn) += 1.0;
    const double t_pos = (np + 1.0) / (np + 2.0);
    const double t_neg = 1.0 / (nn + 2.0);
    a = 1.0;
    b = 0.0;
    for (int it = 0; it < 100; ++it) {
        double ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
        for (std::size_t i = 0; i < margins.size(); ++i) {
            const double t = y[i] == 1.0 ? t_pos : t_neg;
            const double p = sigmoid(a * margins[i] + b);
            const double r = p - t;
            const double s = std::max(p * (1.0 - p), 1e-12);
            ga += r * margins[i];
            gb += r;
            haa += s * margins[i] * margins[i];
            hab += s * margins[i];
            hbb += s;
        }
        haa += 1e-12;
        hbb += 1e-12;
        const double det = haa * hbb - hab * hab;
        if (std::abs(det) < 1e-300) break;
        const double da = (hbb * ga - hab * gb) / det;
        const double db = (haa * gb - hab * ga) / det;
        a -= da;
        b -= db;
        if (std::max(std::abs(da), std::abs(db)) < 1e-12) break;
    }
}

std::shared_ptr<const Model> fit_linear_svm(const LearnerSpec& spec, const Matrix& x,
                                            const std::vector<double>& y) {
    const double lambda = spec.param("l2", 1e-2);
    if (lambda <= 0) throw ConfigError("l2 must be > 0 for linear_svm");
    const std::size_t epochs = std::size_t(spec.param("epochs", 50));
    const std::size_t n = x.rows, d = x.cols;

    auto m = std::make_shared<LinearSvmModel>();
    m->w.assign(d, 0.0);
    std::size_t t = 0;
    for (std::size_t e = 0; e < epochs; ++e) {
        for (std::size_t i = 0; i < n; ++i) {
            ++t;
            const double eta = 1.0 / (lambda * double(t));
            const double s = 2.0 * y[i] - 1.0;
            const double margin = s * (m->margin(x.row_ptr(i), d));
            const double shrink = 1.0 - eta * lambda;
            for (double& v : m->w) v *= shrink;
            if (margin < 1.0) {
                const double* xi = x.row_ptr(i);
                for (std::size_t j = 0; j < d; ++j) m->w[j] += eta * s * xi[j];
                m->b += eta * s;
            }
        }
    }

    std::vector<double> margins(n);
    for (std::size_t i = 0; i < n; ++i) margins[i] = m->margin(x.row_ptr(i), d);
    fit_platt(margins, y, m->platt_a, m->platt_b);
    return m;
}

std::shared_ptr<const Model> fit_mlp(const LearnerSpec& spec, const Matrix& x,
                                     const std::vector<double>& y) {
    const std::size_t hidden = std::size_t(spec.param("hidden", 32));
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
    const double lr = spec.param("learning_rate", 0.1);
    const std::size_t max_iter = std::size_t(spec.param("max_iter", 200));
    const double tol = spec.param("tol", 1e-8);
    const std::size_t d = x.cols;

    auto m = std::make_shared<MlpModel>();
    m->hidden = hidden;
    m->d = d;
    m->params.assign(mlp_param_count(d, hidden), 0.0);
    Rng rng(spec.seed);
    const double r1 = 1.0 / std::sqrt(double(d));
    for (std::size_t i = 0; i < hidden * d; ++i) m->params[i] = rng.uniform(-r1, r1);
    const double r2 = 1.0 / std::sqrt(double(hidden));
    for (std::size_t i = 0; i < hidden; ++i) {
        m->params[hidden * d + hidden + i] = rng.uniform(-r2, r2);
    }

    std::vector<double> grad;
    for (std::size_t it = 0; it < max_iter; ++it) {
        mlp_loss_grad(x, y, hidden, m->params, &grad);
        double gmax = 0;
        for (std::size_t j = 0; j < grad.size(); ++j) {
            m->params[j] -= lr * grad[j];
            gmax = std::max(gmax, std::abs(grad[j]));
        }
        if (gmax < tol) break;
    }
    return m;
}

std::shared_ptr<const Model> fit_kmeans_anomaly(const LearnerSpec& spec, const Matrix& x) {
    std::size_t k = std::size_t(spec.param("k", 8));
    if (k < 1) throw ConfigError("k must be >= 1");
    k = std::min(k, x.rows);
    const std::size_t max_iter = std::size_t(spec.param("max_iter", 100));
    const std::size_t n = x.rows, d = x.cols;

    Rng rng(spec.seed);
    auto init = rng.permutation(n);
    auto m = std::make_shared<KmeansAnomalyModel>();
    m->centroids = Matrix(k, d);
    for (std::size_t c = 0; c < k; ++c) {
        const double* src = x.row_ptr(init[c]);
        std::copy(src, src + d, m->centroids.data.begin() + std::ptrdiff_t(c * d));
    }

    std::vector<std::size_t> assign(n, 0);
    for (std::size_t it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double dist = squared_distance(x.row_ptr(i), m->centroids.row_ptr(c), d);
                if (dist < best) {
                    best = dist;
                    arg = c;
                }
            }
            if (arg != assign[i]) {
                assign[i] = arg;
                changed = true;
            }
        }
        if (!changed && it > 0) break;
        Matrix sums(k, d);
        std::vector<double> counts(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[assign[i]] += 1.0;
            const double* xi = x.row_ptr(i);
            for (std::size_t j = 0; j < d; ++j) sums(assign[i], j) += xi[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t j = 0; j < d; ++j) m->centroids(c, j) = sums(c, j) / counts[c];
        }
    }

    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dist = m->nearest(x.row_ptr(i), d);
        lo = std::min(lo, dist);
        hi = std::max(hi, dist);
    }
    m->dist_min = lo;
    m->dist_max = hi;
    return m;
}

void validate_labels(const LearnerSpec& spec, const Matrix& x, const std::vector<double>& y) {
    if (x.rows != y.size()) throw DataError("label vector length does not match rows");
    if (x.rows == 0) throw DataError("cannot fit on an empty matrix");
    for (double v : x.data) {
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
    if (spec.kind == LearnerKind::kmeans_anomaly) return;

    const bool allow_missing = spec.kind == LearnerKind::self_training;
    bool has0 = false, has1 = false;
    for (double v : y) {
        if (std::isnan(v)) {
            if (!allow_missing)
                throw DataError("missing labels passed to supervised learner " +
                                to_string(spec.kind));
            continue;
        }
        if (v == 0.0) {
            has0 = true;
        } else if (v == 1.0) {
            has1 = true;
        } else {
            throw DataError("labels must be 0 or 1");
        }
    }
    if (!has0 || !has1)
        throw DataError("training labels contain a single class; " + to_string(spec.kind) +
                        " needs both");
}

}  // namespace

LearnerKind learner_kind_from_string(const std::string& s) {
    for (LearnerKind k : all_learner_kinds()) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown learner kind: " + s);
}

std::string to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::logistic_regression: return "logistic_regression";
        case LearnerKind::decision_tree: return "decision_tree";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::bagging: return "bagging";
        case LearnerKind::adaboost: return "adaboost";
        case LearnerKind::gradient_boosting: return "gradient_boosting";
        case LearnerKind::rusboost: return "rusboost";
        case LearnerKind::gaussian_nb: return "gaussian_nb";
        case LearnerKind::knn: return "knn";
        case LearnerKind::linear_svm: return "linear_svm";
        case LearnerKind::mlp: return "mlp";
        case LearnerKind::self_training: return "self_training";
        case LearnerKind::kmeans_anomaly: return "kmeans_anomaly";
    }
    throw ConfigError("bad learner kind value");
}

const std::vector<LearnerKind>& all_learner_kinds() {
    static const std::vector<LearnerKind> kinds = {
        LearnerKind::logistic_regression, LearnerKind::decision_tree,
        LearnerKind::random_forest,       LearnerKind::bagging,
        LearnerKind::adaboost,            LearnerKind::gradient_boosting,
        LearnerKind::rusboost,            LearnerKind::gaussian_nb,
        LearnerKind::knn,                 LearnerKind::linear_svm,
        LearnerKind::mlp,                 LearnerKind::self_training,
        LearnerKind::kmeans_anomaly,
    };
    return kinds;
}

bool is_supervised(LearnerKind kind) { return kind != LearnerKind::kmeans_anomaly; }

double LearnerSpec::param(const std::string& name, double fallback) const {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
}

nlohmann::json LearnerSpec::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)}, {"params", params}, {"seed", seed}};
    if (!base.empty()) j["base"] = base.front().to_json();
    return j;
}

LearnerSpec LearnerSpec::from_json(const nlohmann::json& j) {
    LearnerSpec spec;
    spec.kind = learner_kind_from_string(j.at("kind"));
    if (j.contains("params")) {
        spec.params = j.at("params").get<std::map<std::string, double>>();
    }
    if (j.contains("seed")) spec.seed = j.at("seed");
    if (j.contains("base")) spec.base.push_back(LearnerSpec::from_json(j.at("base")));
    return spec;
}

std::shared_ptr<const Model> model_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind");
    if (kind == "logistic_regression") {
        auto m = std::make_shared<LogisticModel>();
        m->w = j.at("w").get<std::vector<double>>();
        m->b = j.at("b");
        return m;
    }
    if (kind == "decision_tree") {
        auto m = std::make_shared<TreeModel>();
        m->tree = Tree::from_json(j.at("tree"));
        return m;
    }
    if (kind == "bagging" || kind == "random_forest") {
        auto m = std::make_shared<TreeEnsembleModel>();
        m->kind = kind;
        m->vote = j.at("vote");
        for (const auto& t : j.at("trees")) m->trees.push_back(Tree::from_json(t));
        return m;
    }
    if (kind == "adaboost" || kind == "rusboost") {
        auto m = std::make_shared<BoostModel>();
        m->kind = kind;
        m->alphas = j.at("alphas").get<std::vector<double>>();
        for (const auto& t : j.at("trees")) m->trees.push_back(Tree::from_json(t));
        return m;
    }
    if (kind == "gradient_boosting") {
        auto m = std::make_shared<GradientBoostingModel>();
        m->f0 = j.at("f0");
        m->learning_rate = j.at("learning_rate");
        for (const auto& t : j.at("trees")) m->trees.push_back(Tree::from_json(t));
        return m;
    }
    if (kind == "gaussian_nb") {
        auto m = std::make_shared<GaussianNbModel>();
        m->log_prior0 = j.at("log_prior0");
        m->log_prior1 = j.at("log_prior1");
        m->mean0 = j.at("mean0").get<std::vector<double>>();
        m->var0 = j.at("var0").get<std::vector<double>>();
        m->mean1 = j.at("mean1").get<std::vector<double>>();
        m->var1 = j.at("var1").get<std::vector<double>>();
        return m;
    }
    if (kind == "knn") {
        auto m = std::make_shared<KnnModel>();
        m->k = j.at("k");
        m->train.rows = j.at("rows");
        m->train.cols = j.at("cols");
        m->train.data = j.at("data").get<std::vector<double>>();
        m->labels = j.at("labels").get<std::vector<double>>();
        return m;
    }
    if (kind == "linear_svm") {
        auto m = std::make_shared<LinearSvmModel>();
        m->w = j.at("w").get<std::vector<double>>();
        m->b = j.at("b");
        m->platt_a = j.at("platt_a");
        m->platt_b = j.at("platt_b");
        return m;
    }
    if (kind == "mlp") {
        auto m = std::make_shared<MlpModel>();
        m->hidden = j.at("hidden");
        m->d = j.at("d");
        m->params = j.at("params").get<std::vector<double>>();
        return m;
    }
    if (kind == "kmeans_anomaly") {
        auto m = std::make_shared<KmeansAnomalyModel>();
        m->centroids.rows = j.at("k");
        m->centroids.cols = j.at("cols");
        m->centroids.data = j.at("centroids").get<std::vector<double>>();
        m->dist_min = j.at("dist_min");
        m->dist_max = j.at("dist_max");
        return m;
    }
    throw DataError("unknown model kind in artifact: " + kind);
}

nlohmann::json FittedModel::to_json() const {
    return {{"spec", spec.to_json()},
            {"n_features", n_features},
            {"fit_seconds", fit_seconds},
            {"model", model->to_json()}};
}

FittedModel FittedModel::from_json(const nlohmann::json& j) {
    FittedModel fm;
    fm.spec = LearnerSpec::from_json(j.at("spec"));
    fm.n_features = j.at("n_features");
    fm.fit_seconds = j.at("fit_seconds");
    fm.model = model_from_json(j.at("model"));
    return fm;
}

namespace {

FittedModel fit_self_training_impl(const LearnerSpec& spec, const Matrix& x,
                                   const std::vector<double>& y) {
    LearnerSpec base = spec.base.empty() ? LearnerSpec{} : spec.base.front();
    base.seed = spec.seed;
    if (base.kind == LearnerKind::self_training)
        throw ConfigError("self_training cannot wrap itself");
    const double confidence = spec.param("confidence", 0.95);
    const std::size_t max_rounds = std::size_t(spec.param("max_rounds", 10));

    std::vector<std::size_t> labeled, unlabeled;
    for (std::size_t i = 0; i < y.size(); ++i) {
        (std::isnan(y[i]) ? unlabeled : labeled).push_back(i);
    }
    std::vector<double> work = y;

    FittedModel fitted = fit(base, subset_rows(x, labeled), subset(work, labeled));
    for (std::size_t round = 0; round < max_rounds && !unlabeled.empty(); ++round) {
        std::vector<std::size_t> still;
        std::vector<std::size_t> added;
        for (std::size_t i : unlabeled) {
            const double p = fitted.model->score(x.row_ptr(i), x.cols);
            if (std::max(p, 1.0 - p) >= confidence) {
                work[i] = p >= 0.5 ? 1.0 : 0.0;
                added.push_back(i);
            } else {
                still.push_back(i);
            }
        }
        if (added.empty()) break;
        labeled.insert(labeled.end(), added.begin(), added.end());
        std::sort(labeled.begin(), labeled.end());
        unlabeled = std::move(still);
        fitted = fit(base, subset_rows(x, labeled), subset(work, labeled));
    }
    return fitted;
}

}  // namespace

FittedModel fit(const LearnerSpec& spec, const Matrix& x, const std::vector<double>& y) {
    validate_labels(spec, x, y);
    Stopwatch timer;
    FittedModel fm;
    fm.spec = spec;
    fm.n_features = x.cols;
    switch (spec.kind) {
        case LearnerKind::logistic_regression: fm.model = fit_logistic(spec, x, y); break;
        case LearnerKind::decision_tree: fm.model = fit_decision_tree(spec, x, y); break;
        case LearnerKind::bagging: fm.model = fit_tree_ensemble(spec, x, y, false); break;
        case LearnerKind::random_forest: fm.model = fit_tree_ensemble(spec, x, y, true); break;
        case LearnerKind::adaboost: fm.model = fit_boost(spec, x, y, false); break;
        case LearnerKind::rusboost: fm.model = fit_boost(spec, x, y, true); break;
        case LearnerKind::gradient_boosting:
            fm.model = fit_gradient_boosting(spec, x, y, &fm.loss_path);
            break;
        case LearnerKind::gaussian_nb: fm.model = fit_gaussian_nb(x, y); break;
        case LearnerKind::knn: fm.model = fit_knn(spec, x, y); break;
        case LearnerKind::linear_svm: fm.model = fit_linear_svm(spec, x, y); break;
        case LearnerKind::mlp: fm.model = fit_mlp(spec, x, y); break;
        case LearnerKind::kmeans_anomaly: fm.model = fit_kmeans_anomaly(spec, x); break;
        case LearnerKind::self_training: {
            FittedModel inner = fit_self_training_impl(spec, x, y);
            fm.model = inner.model;
            break;
        }
    }
    fm.fit_seconds = timer.seconds();
    return fm;
}

std::vector<double> predict_proba(const FittedModel& model, const Matrix& x) {
    if (x.cols != model.n_features)
        throw DataError("expected " + std::to_string(model.n_features) + " features, got " +
                        std::to_string(x.cols));
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        out[i] = model.model->score(x.row_ptr(i), x.cols);
    }
    return out;
}

std::vector<int> predict(const FittedModel& model, const Matrix& x, double threshold) {
    auto probs = predict_proba(model, x);
    std::vector<int> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
    return out;
}

double logistic_loss_grad(const Matrix& x, const std::vector<double>& y,
                          const std::vector<double>& w, double l2, std::vector<double>* grad) {
    const std::size_t n = x.rows, d = x.cols;
    if (w.size() != d + 1) throw ConfigError("weight vector must have n_features + 1 entries");
    if (grad) grad->assign(d + 1, 0.0);
    double loss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row_ptr(i);
        double z = w[d];
        for (std::size_t j = 0; j < d; ++j) z += w[j] * xi[j];
        const double sign = 2.0 * y[i] - 1.0;
        loss += log1pexp(-sign * z);
        if (grad) {
            const double r = (sigmoid(z) - y[i]) / double(n);
            for (std::size_t j = 0; j < d; ++j) (*grad)[j] += r * xi[j];
            (*grad)[d] += r;
        }
    }
    loss /= double(n);
    for (std::size_t j = 0; j < d; ++j) {
        loss += 0.5 * l2 * w[j] * w[j];
        if (grad) (*grad)[j] += l2 * w[j];
    }
    return loss;
}

std::size_t mlp_param_count(std::size_t n_features, std::size_t hidden) {
    return hidden * n_features + hidden + hidden + 1;
}

double mlp_loss_grad(const Matrix& x, const std::vector<double>& y, std::size_t hidden,
                     const std::vector<double>& params, std::vector<double>* grad) {
    const std::size_t n = x.rows, d = x.cols;
    if (params.size() != mlp_param_count(d, hidden))
        throw ConfigError("mlp parameter vector has the wrong length");
    const double* w1 = params.data();
    const double* b1 = w1 + hidden * d;
    const double* w2 = b1 + hidden;
    const double b2 = params[hidden * d + 2 * hidden];
    if (grad) grad->assign(params.size(), 0.0);

    double loss = 0;
    std::vector<double> h(hidden);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row_ptr(i);
        double z = b2;
        for (std::size_t k = 0; k < hidden; ++k) {
            double a = b1[k];
            for (std::size_t j = 0; j < d; ++j) a += w1[k * d + j] * xi[j];
            h[k] = std::tanh(a);
            z += w2[k] * h[k];
        }
        const double sign = 2.0 * y[i] - 1.0;
        loss += log1pexp(-sign * z);
        if (grad) {
            const double dz = (sigmoid(z) - y[i]) / double(n);
            double* g1 = grad->data();
            double* gb1 = g1 + hidden * d;
            double* g2 = gb1 + hidden;
            for (std::size_t k = 0; k < hidden; ++k) {
                g2[k] += dz * h[k];
                const double dh = dz * w2[k] * (1.0 - h[k] * h[k]);
                gb1[k] += dh;
                for (std::size_t j = 0; j < d; ++j) g1[k * d + j] += dh * xi[j];
            }
            (*grad)[hidden * d + 2 * hidden] += dz;
        }
    }
    return loss / double(n);
}

}  // namespace scml
