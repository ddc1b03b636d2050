#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "scml/resample.hpp"

using namespace scml;

namespace {

Table numeric_table(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    Table t;
    t.n_rows = y.size();
    for (std::size_t j = 0; j < x.size(); ++j) {
        t.columns.push_back(Column::make_numeric("f" + std::to_string(j), x[j]));
    }
    t.columns.push_back(Column::make_numeric("y", y));
    t.target_index = t.columns.size() - 1;
    return t;
}

Table imbalanced_gaussians(Rng& rng, std::size_t n_majority, std::size_t n_minority,
                           std::size_t d = 3) {
    std::vector<std::vector<double>> x(d);
    std::vector<double> y;
    for (std::size_t i = 0; i < n_majority + n_minority; ++i) {
        const bool minority = i >= n_majority;
        for (std::size_t j = 0; j < d; ++j) x[j].push_back(rng.normal() + (minority ? 2.0 : 0.0));
        y.push_back(minority ? 1.0 : 0.0);
    }
    return numeric_table(x, y);
}

std::vector<double> feature_row(const Table& t, std::size_t r) {
    std::vector<double> out;
    for (std::size_t c : t.feature_indices()) out.push_back(t.columns[c].numeric[r]);
    return out;
}

// Distance from point s to the closed segment [a, b].
double segment_residual(const std::vector<double>& s, const std::vector<double>& a,
                        const std::vector<double>& b) {
    const std::size_t d = s.size();
    double dd = 0, vd = 0;
    for (std::size_t j = 0; j < d; ++j) {
        dd += (b[j] - a[j]) * (b[j] - a[j]);
        vd += (s[j] - a[j]) * (b[j] - a[j]);
    }
    double u = dd == 0 ? 0.0 : vd / dd;
    u = std::clamp(u, 0.0, 1.0);
    double res = 0;
    for (std::size_t j = 0; j < d; ++j) {
        const double e = s[j] - a[j] - u * (b[j] - a[j]);
        res += e * e;
    }
    return std::sqrt(res);
}

// Independent k-NN: the k nearest minority rows to minority row r, ties by index.
std::vector<std::size_t> brute_knn(const Table& t, const std::vector<std::size_t>& minority,
                                   std::size_t r, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    auto a = feature_row(t, r);
    for (std::size_t m : minority) {
        if (m == r) continue;
        auto b = feature_row(t, m);
        double s = 0;
        for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
        d.emplace_back(s, m);
    }
    std::sort(d.begin(), d.end());
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < std::min(k, d.size()); ++j) out.push_back(d[j].second);
    return out;
}

}  // namespace

TEST_CASE("smote with two collinear minority points stays on the line") {
    // minority (0,0) and (1,1), k=1: every synthetic point is (t,t)
    std::vector<std::vector<double>> x = {{5, 6, 7, 8, 9, 0, 1}, {5, 6, 7, 8, 9, 0, 1}};
    std::vector<double> y = {0, 0, 0, 0, 0, 1, 1};
    Table t = numeric_table(x, y);
    ResampleSpec spec;
    spec.method = ResampleMethod::smote;
    spec.k_neighbors = 1;
    spec.seed = 3;
    Table out = smote(t, spec);
    CHECK(out.n_rows == 10);  // ceil(1.0*5) - 2 = 3 appended
    for (std::size_t r = t.n_rows; r < out.n_rows; ++r) {
        const double a = out.columns[0].numeric[r];
        const double b = out.columns[1].numeric[r];
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(out.columns[2].numeric[r] == 1.0);
    }
}

TEST_CASE("smote appended count follows the target ratio") {
    Rng rng(11);
    Table t = imbalanced_gaussians(rng, 90, 10);
    ResampleSpec spec;
    spec.method = ResampleMethod::smote;
    Table out = smote(t, spec);
    CHECK(out.n_rows - t.n_rows == 80);
    auto by_class = out.class_row_indices();
    CHECK(by_class[0].size() == 90);
    CHECK(by_class[1].size() == 90);
}

TEST_CASE("smote leaves original rows unchanged") {
    Rng rng(13);
    Table t = imbalanced_gaussians(rng, 30, 6);
    ResampleSpec spec;
    spec.method = ResampleMethod::smote;
    Table out = smote(t, spec);
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        for (std::size_t r = 0; r < t.n_rows; ++r) {
            CHECK(out.columns[c].numeric[r] == t.columns[c].numeric[r]);
        }
    }
}

TEST_CASE("smote rejects a single minority row and categorical features") {
    Table one = numeric_table({{1, 2, 3}}, {0, 0, 1});
    ResampleSpec spec;
    spec.method = ResampleMethod::smote;
    CHECK_THROWS_AS(smote(one, spec), DataError);

    Table cat;
    cat.n_rows = 4;
    cat.columns.push_back(Column::make_categorical("c", {"A", "B", "A", "B"}));
    cat.columns.push_back(Column::make_numeric("y", {0, 0, 1, 1}));
    cat.target_index = 1;
    CHECK_THROWS_AS(smote(cat, spec), DataError);
}

TEST_CASE("smote ratio already met is the identity") {
    Table t = numeric_table({{0, 1, 2, 3}}, {0, 0, 1, 1});
    ResampleSpec spec;
    spec.method = ResampleMethod::smote;
    Table out = smote(t, spec);
    CHECK(out.n_rows == t.n_rows);
}

TEST_CASE("every smote row lies on a seed-to-neighbor segment (brute-force oracle)") {
    Rng rng(29);
    for (int rep = 0; rep < 5; ++rep) {
        Table t = imbalanced_gaussians(rng, 40 + rep * 10, 7 + rep, 4);
        ResampleSpec spec;
        spec.method = ResampleMethod::smote;
        spec.k_neighbors = 3;
        spec.seed = 100 + std::uint64_t(rep);
        spec.target_ratio = 0.8;
        Table out = smote(t, spec);
        auto minority = t.class_row_indices()[1];

        // requested ratio within rounding
        auto by_class = out.class_row_indices();
        const double got = double(by_class[1].size()) / double(by_class[0].size());
        const double lo = (std::ceil(0.8 * double(by_class[0].size())) - 1.0) /
                          double(by_class[0].size());
        CHECK(got >= lo);
        CHECK(got <= (std::ceil(0.8 * double(by_class[0].size())) + 1.0) /
                         double(by_class[0].size()));

        for (std::size_t r = t.n_rows; r < out.n_rows; ++r) {
            std::vector<double> s;
            for (std::size_t c : out.feature_indices()) s.push_back(out.columns[c].numeric[r]);
            bool on_some_segment = false;
            for (std::size_t seed_row : minority) {
                auto a = feature_row(t, seed_row);
                for (std::size_t nb : brute_knn(t, minority, seed_row, 3)) {
                    auto b = feature_row(t, nb);
                    if (segment_residual(s, a, b) < 1e-9) {
                        on_some_segment = true;
                        break;
                    }
                }
                if (on_some_segment) break;
            }
            CHECK(on_some_segment);
        }
    }
}

TEST_CASE("smote is deterministic in the seed") {
    Rng rng(31);
    Table t = imbalanced_gaussians(rng, 25, 5);
    ResampleSpec spec;
    spec.method = ResampleMethod::smote;
    spec.seed = 77;
    Table a = smote(t, spec);
    Table b = smote(t, spec);
    for (std::size_t c = 0; c < a.columns.size(); ++c) CHECK(a.columns[c].numeric == b.columns[c].numeric);
    spec.seed = 78;
    Table c2 = smote(t, spec);
    bool same = true;
    for (std::size_t c = 0; c < a.columns.size() && same; ++c) {
        same = a.columns[c].numeric == c2.columns[c].numeric;
    }
    CHECK_FALSE(same);
}

TEST_CASE("random_over duplicates minority rows") {
    Table t = numeric_table({{0, 1, 2, 3, 10, 20}}, {0, 0, 0, 0, 1, 1});
    ResampleSpec spec;
    spec.method = ResampleMethod::random_over;
    spec.seed = 5;
    Table out = random_over(t, spec);
    CHECK(out.n_rows == 8);
    for (std::size_t r = 6; r < 8; ++r) {
        const double v = out.columns[0].numeric[r];
        CHECK((v == 10.0 || v == 20.0));
        CHECK(out.columns[1].numeric[r] == 1.0);
    }
}

TEST_CASE("random_over at the observed ratio is the identity") {
    Table t = numeric_table({{0, 1, 2, 3}}, {0, 0, 1, 1});
    ResampleSpec spec;
    spec.method = ResampleMethod::random_over;
    Table out = random_over(t, spec);
    CHECK(out.n_rows == 4);
}

TEST_CASE("random_over appended rows come from the minority multiset") {
    Rng rng(41);
    Table t = imbalanced_gaussians(rng, 50, 8);
    ResampleSpec spec;
    spec.method = ResampleMethod::random_over;
    spec.seed = 9;
    Table out = random_over(t, spec);
    auto minority = t.class_row_indices()[1];
    for (std::size_t r = t.n_rows; r < out.n_rows; ++r) {
        auto srow = feature_row(out, r);
        bool found = false;
        for (std::size_t m : minority) {
            if (feature_row(t, m) == srow) {
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("random_under keeps the requested majority count") {
    Rng rng(43);
    Table t = imbalanced_gaussians(rng, 100, 10);
    ResampleSpec spec;
    spec.method = ResampleMethod::random_under;
    spec.target_ratio = 0.5;
    spec.seed = 2;
    Table out = random_under(t, spec);
    auto by_class = out.class_row_indices();
    CHECK(by_class[0].size() == 20);
    CHECK(by_class[1].size() == 10);
}

TEST_CASE("random_under at ratio 1 balances the classes") {
    Rng rng(47);
    Table t = imbalanced_gaussians(rng, 60, 15);
    ResampleSpec spec;
    spec.method = ResampleMethod::random_under;
    spec.seed = 6;
    Table out = random_under(t, spec);
    auto by_class = out.class_row_indices();
    CHECK(by_class[0].size() == 15);
    CHECK(by_class[1].size() == 15);
}

TEST_CASE("random_under result rows are a subset of the original rows") {
    Rng rng(53);
    Table t = imbalanced_gaussians(rng, 40, 10);
    ResampleSpec spec;
    spec.method = ResampleMethod::random_under;
    spec.target_ratio = 0.7;
    spec.seed = 8;
    Table out = random_under(t, spec);
    std::map<std::vector<double>, int> counts;
    for (std::size_t r = 0; r < t.n_rows; ++r) ++counts[feature_row(t, r)];
    for (std::size_t r = 0; r < out.n_rows; ++r) {
        auto it = counts.find(feature_row(out, r));
        REQUIRE(it != counts.end());
        CHECK(it->second > 0);
        --it->second;
    }
}

TEST_CASE("random_under refuses to lower the ratio") {
    Rng rng(59);
    Table t = imbalanced_gaussians(rng, 30, 15);
    ResampleSpec spec;
    spec.method = ResampleMethod::random_under;
    spec.target_ratio = 0.2;  // observed is 0.5
    CHECK_THROWS_AS(random_under(t, spec), DataError);
}

TEST_CASE("resample dispatch and spec validation") {
    Table t = numeric_table({{0, 1, 2, 3}}, {0, 0, 1, 1});
    ResampleSpec spec;
    CHECK(resample(t, spec).n_rows == t.n_rows);
    spec.k_neighbors = 0;
    CHECK_THROWS_AS(resample(t, spec), ConfigError);
    spec.k_neighbors = 5;
    spec.target_ratio = 0.0;
    CHECK_THROWS_AS(resample(t, spec), ConfigError);
    spec.target_ratio = 1.5;
    CHECK_THROWS_AS(resample(t, spec), ConfigError);
}

TEST_CASE("resample spec JSON round trip") {
    ResampleSpec spec;
    spec.method = ResampleMethod::smote;
    spec.k_neighbors = 7;
    spec.target_ratio = 0.65;
    spec.seed = 123;
    ResampleSpec back = ResampleSpec::from_json(spec.to_json());
    CHECK(back.method == spec.method);
    CHECK(back.k_neighbors == spec.k_neighbors);
    CHECK(back.target_ratio == spec.target_ratio);
    CHECK(back.seed == spec.seed);
    CHECK_THROWS_AS(ResampleSpec::from_json({{"method", "bogus"}}), ConfigError);
}
