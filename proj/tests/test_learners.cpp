#include <doctest.h>

#include <cmath>

#include "scml/learners.hpp"

using namespace scml;

namespace {

struct Problem {
    Matrix x;
    std::vector<double> y;
};

Problem blobs(Rng& rng, std::size_t n_neg, std::size_t n_pos, std::size_t d, double sep) {
    Problem p;
    p.x = Matrix(n_neg + n_pos, d);
    for (std::size_t i = 0; i < n_neg + n_pos; ++i) {
        const bool pos = i >= n_neg;
        p.y.push_back(pos ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            p.x(i, j) = rng.normal() + (pos ? sep : -sep);
        }
    }
    return p;
}

double training_accuracy(const FittedModel& m, const Problem& p) {
    auto pred = predict(m, p.x);
    double ok = 0;
    for (std::size_t i = 0; i < p.y.size(); ++i) {
        if (double(pred[i]) == p.y[i]) ok += 1.0;
    }
    return ok / double(p.y.size());
}

LearnerSpec spec_of(LearnerKind kind, std::uint64_t seed = 7) {
    LearnerSpec s;
    s.kind = kind;
    s.seed = seed;
    // keep ensembles small so the whole-zoo sweeps stay fast
    switch (kind) {
        case LearnerKind::bagging:
        case LearnerKind::random_forest:
        case LearnerKind::adaboost:
        case LearnerKind::rusboost:
            s.params["n_estimators"] = 10;
            break;
        case LearnerKind::gradient_boosting: s.params["n_rounds"] = 20; break;
        case LearnerKind::mlp:
            s.params["hidden"] = 8;
            s.params["max_iter"] = 50;
            break;
        default: break;
    }
    return s;
}

}  // namespace

TEST_CASE("every kind fits, scores within [0,1], and is seed-deterministic") {
    Rng rng(1);
    Problem p = blobs(rng, 30, 20, 3, 1.0);
    Problem fresh = blobs(rng, 10, 10, 3, 1.0);
    for (LearnerKind kind : all_learner_kinds()) {
        CAPTURE(to_string(kind));
        auto a = fit(spec_of(kind), p.x, p.y);
        auto b = fit(spec_of(kind), p.x, p.y);
        auto pa = predict_proba(a, fresh.x);
        auto pb = predict_proba(b, fresh.x);
        CHECK(pa == pb);
        CHECK(a.model->to_json() == b.model->to_json());
        for (double v : pa) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(std::isfinite(v));
        }
        CHECK(a.fit_seconds >= 0.0);
    }
}

TEST_CASE("supervised kinds reject single-class and missing labels") {
    Rng rng(2);
    Problem p = blobs(rng, 20, 20, 2, 1.0);
    std::vector<double> ones(p.y.size(), 1.0);
    std::vector<double> holes = p.y;
    holes[3] = std::nan("");
    for (LearnerKind kind : all_learner_kinds()) {
        if (kind == LearnerKind::kmeans_anomaly) continue;
        CAPTURE(to_string(kind));
        CHECK_THROWS_AS(fit(spec_of(kind), p.x, ones), DataError);
        if (kind != LearnerKind::self_training) {
            CHECK_THROWS_AS(fit(spec_of(kind), p.x, holes), DataError);
        }
    }
    CHECK_NOTHROW(fit(spec_of(LearnerKind::kmeans_anomaly), p.x, ones));
}

TEST_CASE("decision tree solves XOR at depth 2") {
    Matrix x(4, 2);
    x(0, 0) = 0; x(0, 1) = 0;
    x(1, 0) = 1; x(1, 1) = 1;
    x(2, 0) = 0; x(2, 1) = 1;
    x(3, 0) = 1; x(3, 1) = 0;
    Problem p{x, {0, 0, 1, 1}};
    auto spec = spec_of(LearnerKind::decision_tree);
    spec.params["max_depth"] = 2;
    auto m = fit(spec, p.x, p.y);
    CHECK(training_accuracy(m, p) == 1.0);
}

TEST_CASE("logistic regression separates linearly separable blobs") {
    Rng rng(3);
    Problem p = blobs(rng, 25, 25, 2, 3.0);
    auto m = fit(spec_of(LearnerKind::logistic_regression), p.x, p.y);
    CHECK(training_accuracy(m, p) == 1.0);
}

TEST_CASE("linear svm separates blobs and calibrates scores") {
    Rng rng(4);
    Problem p = blobs(rng, 25, 25, 2, 3.0);
    auto m = fit(spec_of(LearnerKind::linear_svm), p.x, p.y);
    CHECK(training_accuracy(m, p) == 1.0);
    auto probs = predict_proba(m, p.x);
    // calibrated scores separate the classes in probability space too
    double max_neg = 0, min_pos = 1;
    for (std::size_t i = 0; i < p.y.size(); ++i) {
        if (p.y[i] == 1.0) {
            min_pos = std::min(min_pos, probs[i]);
        } else {
            max_neg = std::max(max_neg, probs[i]);
        }
    }
    CHECK(min_pos > max_neg);
}

TEST_CASE("gaussian nb gives probability one half at the symmetry midpoint") {
    Matrix x(4, 1);
    x(0, 0) = -2;
    x(1, 0) = -1;
    x(2, 0) = 1;
    x(3, 0) = 2;
    auto m = fit(spec_of(LearnerKind::gaussian_nb), x, {0, 0, 1, 1});
    Matrix q(1, 1);
    q(0, 0) = 0.0;
    CHECK(predict_proba(m, q)[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("knn with k=1 returns the label of an exact training match") {
    Rng rng(5);
    Problem p = blobs(rng, 10, 10, 2, 1.0);
    auto spec = spec_of(LearnerKind::knn);
    spec.params["k"] = 1;
    auto m = fit(spec, p.x, p.y);
    for (std::size_t i : {std::size_t(0), std::size_t(12), std::size_t(19)}) {
        Matrix q(1, 2);
        q(0, 0) = p.x(i, 0);
        q(0, 1) = p.x(i, 1);
        CHECK(predict_proba(m, q)[0] == p.y[i]);
    }
}

TEST_CASE("knn k larger than the training set clamps") {
    Matrix x(3, 1);
    x(0, 0) = 0;
    x(1, 0) = 1;
    x(2, 0) = 2;
    auto spec = spec_of(LearnerKind::knn);
    spec.params["k"] = 10;
    auto m = fit(spec, x, {0, 1, 1});
    Matrix q(1, 1);
    q(0, 0) = 5;
    CHECK(predict_proba(m, q)[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("a forest of identical stumps scores like one stump") {
    Matrix x(5, 1);
    x(0, 0) = 0;
    x(1, 0) = 0;
    x(2, 0) = 1;
    x(3, 0) = 1;
    x(4, 0) = 1;
    std::vector<double> y = {0, 0, 0, 1, 1};
    auto forest_spec = spec_of(LearnerKind::random_forest);
    forest_spec.params["max_depth"] = 1;
    forest_spec.params["bootstrap"] = 0;
    forest_spec.params["mtry"] = 1;
    auto stump_spec = spec_of(LearnerKind::decision_tree);
    stump_spec.params["max_depth"] = 1;
    auto forest = fit(forest_spec, x, y);
    auto stump = fit(stump_spec, x, y);
    Matrix q(2, 1);
    q(0, 0) = 0.0;
    q(1, 0) = 1.0;
    auto pf = predict_proba(forest, q);
    auto ps = predict_proba(stump, q);
    CHECK(pf[0] == ps[0]);
    CHECK(pf[1] == doctest::Approx(ps[1]).epsilon(1e-15));
    CHECK(pf[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("bagging with one member and no bootstrap predicts like the base tree") {
    Rng rng(6);
    Problem p = blobs(rng, 30, 30, 3, 0.8);
    auto bag_spec = spec_of(LearnerKind::bagging);
    bag_spec.params["n_estimators"] = 1;
    bag_spec.params["bootstrap"] = 0;
    auto bag = fit(bag_spec, p.x, p.y);
    auto tree = fit(spec_of(LearnerKind::decision_tree), p.x, p.y);
    CHECK(predict(bag, p.x) == predict(tree, p.x));
}

TEST_CASE("bagging probability is the vote fraction") {
    Rng rng(7);
    Problem p = blobs(rng, 30, 30, 3, 0.8);
    auto spec = spec_of(LearnerKind::bagging);
    spec.params["n_estimators"] = 10;
    auto m = fit(spec, p.x, p.y);
    auto probs = predict_proba(m, p.x);
    for (double v : probs) {
        // multiples of 1/10
        CHECK(std::abs(v * 10.0 - std::round(v * 10.0)) < 1e-12);
    }
}

TEST_CASE("adaboost accepts only better-than-chance rounds") {
    Rng rng(8);
    Problem p = blobs(rng, 40, 40, 2, 1.0);
    auto spec = spec_of(LearnerKind::adaboost);
    spec.params["n_estimators"] = 20;
    auto m = fit(spec, p.x, p.y);
    const auto j = m.model->to_json();
    REQUIRE(j.at("alphas").size() >= 1);
    // alpha > 0 iff the round's weighted error was < 0.5
    for (double a : j.at("alphas").get<std::vector<double>>()) CHECK(a > 0.0);
    CHECK(training_accuracy(m, p) > 0.8);
}

TEST_CASE("rusboost trains on imbalanced data with positive round weights") {
    Rng rng(9);
    Problem p = blobs(rng, 80, 20, 2, 1.5);
    auto m = fit(spec_of(LearnerKind::rusboost), p.x, p.y);
    const auto j = m.model->to_json();
    REQUIRE(j.at("alphas").size() >= 1);
    for (double a : j.at("alphas").get<std::vector<double>>()) CHECK(a > 0.0);
}

TEST_CASE("gradient boosting training loss is non-increasing per round") {
    Rng rng(10);
    Problem p = blobs(rng, 40, 40, 3, 1.0);
    auto spec = spec_of(LearnerKind::gradient_boosting);
    spec.params["n_rounds"] = 30;
    spec.params["learning_rate"] = 0.1;
    auto m = fit(spec, p.x, p.y);
    REQUIRE(m.loss_path.size() == 31);
    for (std::size_t i = 1; i < m.loss_path.size(); ++i) {
        CHECK(m.loss_path[i] <= m.loss_path[i - 1] + 1e-12);
    }
}

TEST_CASE("self_training with zero unlabeled rows equals its base learner") {
    Rng rng(11);
    Problem p = blobs(rng, 25, 25, 2, 1.0);
    LearnerSpec st;
    st.kind = LearnerKind::self_training;
    st.seed = 42;
    LearnerSpec base;
    base.kind = LearnerKind::logistic_regression;
    st.base.push_back(base);
    auto a = fit(st, p.x, p.y);
    base.seed = 42;
    auto b = fit(base, p.x, p.y);
    CHECK(predict_proba(a, p.x) == predict_proba(b, p.x));
}

TEST_CASE("self_training pseudo-labels confident unlabeled rows") {
    Rng rng(12);
    Problem p = blobs(rng, 40, 40, 2, 3.0);
    std::vector<double> holes = p.y;
    // unlabel most rows but keep a few of each class
    for (std::size_t i = 0; i < holes.size(); ++i) {
        if (i % 4 != 0) holes[i] = std::nan("");
    }
    LearnerSpec st;
    st.kind = LearnerKind::self_training;
    st.seed = 1;
    auto m = fit(st, p.x, holes);
    CHECK(training_accuracy(m, p) >= 0.95);
}

TEST_CASE("self_training cannot wrap itself") {
    LearnerSpec st;
    st.kind = LearnerKind::self_training;
    st.base.push_back(st);
    Matrix x(4, 1);
    x(1, 0) = 1;
    x(2, 0) = 2;
    x(3, 0) = 3;
    CHECK_THROWS_AS(fit(st, x, {0, 0, 1, 1}), ConfigError);
}

TEST_CASE("kmeans anomaly scores far points higher than inliers") {
    Rng rng(13);
    Matrix x(50, 2);
    for (std::size_t i = 0; i < 50; ++i) {
        x(i, 0) = rng.normal() * 0.1;
        x(i, 1) = rng.normal() * 0.1;
    }
    std::vector<double> y(50, std::nan(""));
    auto spec = spec_of(LearnerKind::kmeans_anomaly);
    spec.params["k"] = 3;
    auto m = fit(spec, x, y);
    Matrix q(2, 2);
    q(0, 0) = 0.0;
    q(0, 1) = 0.0;
    q(1, 0) = 50.0;
    q(1, 1) = 50.0;
    auto probs = predict_proba(m, q);
    CHECK(probs[1] > probs[0]);
    CHECK(probs[1] == 1.0);  // clamped far outlier
}

TEST_CASE("predict applies the threshold boundary rule") {
    Matrix x(4, 1);
    x(1, 0) = 1;
    x(2, 0) = 2;
    x(3, 0) = 3;
    std::vector<double> y = {0, 0, 1, 1};
    auto spec = spec_of(LearnerKind::knn);
    spec.params["k"] = 2;
    auto m = fit(spec, x, y);
    Matrix q(1, 1);
    q(0, 0) = 1.5;  // neighbors are rows 1 and 2 -> probability 0.5
    CHECK(predict_proba(m, q)[0] == 0.5);
    CHECK(predict(m, q, 0.5)[0] == 1);
    CHECK(predict(m, q, 0.0)[0] == 1);
    CHECK(predict(m, q, 0.75)[0] == 0);
}

TEST_CASE("predict_proba rejects feature-count mismatches") {
    Rng rng(14);
    Problem p = blobs(rng, 10, 10, 3, 1.0);
    auto m = fit(spec_of(LearnerKind::gaussian_nb), p.x, p.y);
    Matrix wrong(2, 2);
    CHECK_THROWS_AS(predict_proba(m, wrong), DataError);
}

TEST_CASE("logistic gradient matches central finite differences") {
    Rng rng(15);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 5 + std::size_t(rng.uniform_int(0, 10));
        const std::size_t d = 1 + std::size_t(rng.uniform_int(0, 4));
        Matrix x(n, d);
        for (double& v : x.data) v = rng.normal();
        std::vector<double> y(n);
        for (double& v : y) v = rng.uniform01() < 0.5 ? 0.0 : 1.0;
        std::vector<double> w(d + 1);
        for (double& v : w) v = rng.normal() * 0.5;
        const double l2 = rep % 2 ? 0.1 : 0.0;

        std::vector<double> grad;
        logistic_loss_grad(x, y, w, l2, &grad);
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double h = 1e-5;
            std::vector<double> wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double fd = (logistic_loss_grad(x, y, wp, l2, nullptr) -
                               logistic_loss_grad(x, y, wm, l2, nullptr)) /
                              (2 * h);
            const double scale = std::max({std::abs(grad[j]), std::abs(fd), 1e-8});
            CHECK(std::abs(grad[j] - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("mlp gradient matches central finite differences") {
    Rng rng(16);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 4 + std::size_t(rng.uniform_int(0, 6));
        const std::size_t d = 1 + std::size_t(rng.uniform_int(0, 3));
        const std::size_t hidden = 1 + std::size_t(rng.uniform_int(0, 4));
        Matrix x(n, d);
        for (double& v : x.data) v = rng.normal();
        std::vector<double> y(n);
        for (double& v : y) v = rng.uniform01() < 0.5 ? 0.0 : 1.0;
        std::vector<double> params(mlp_param_count(d, hidden));
        for (double& v : params) v = rng.normal() * 0.5;

        std::vector<double> grad;
        mlp_loss_grad(x, y, hidden, params, &grad);
        for (std::size_t j = 0; j < params.size(); ++j) {
            const double h = 1e-5;
            std::vector<double> pp = params, pm = params;
            pp[j] += h;
            pm[j] -= h;
            const double fd = (mlp_loss_grad(x, y, hidden, pp, nullptr) -
                               mlp_loss_grad(x, y, hidden, pm, nullptr)) /
                              (2 * h);
            const double scale = std::max({std::abs(grad[j]), std::abs(fd), 1e-8});
            CHECK(std::abs(grad[j] - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("every kind round-trips through JSON with identical predictions") {
    Rng rng(17);
    Problem p = blobs(rng, 25, 20, 3, 1.0);
    Problem fresh = blobs(rng, 8, 8, 3, 1.0);
    for (LearnerKind kind : all_learner_kinds()) {
        CAPTURE(to_string(kind));
        auto m = fit(spec_of(kind), p.x, p.y);
        auto back = FittedModel::from_json(m.to_json());
        CHECK(back.n_features == m.n_features);
        CHECK(predict_proba(back, fresh.x) == predict_proba(m, fresh.x));
    }
}

TEST_CASE("learner spec JSON carries nested self_training bases") {
    LearnerSpec st;
    st.kind = LearnerKind::self_training;
    st.seed = 9;
    st.params["confidence"] = 0.9;
    LearnerSpec base;
    base.kind = LearnerKind::gaussian_nb;
    st.base.push_back(base);
    auto back = LearnerSpec::from_json(st.to_json());
    CHECK(back.kind == LearnerKind::self_training);
    CHECK(back.param("confidence", 0) == 0.9);
    REQUIRE(back.base.size() == 1);
    CHECK(back.base[0].kind == LearnerKind::gaussian_nb);
    CHECK_THROWS_AS(learner_kind_from_string("cnn"), ConfigError);
}
