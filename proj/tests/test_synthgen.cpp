#include <doctest.h>

#include <cmath>
#include <map>

#include "scml/evaluate.hpp"
#include "scml/synthgen.hpp"

using namespace scml;

TEST_CASE("failure preset matches the 10000 x 14 roster") {
    const GeneratorSpec spec = default_generator(DataShape::failure);
    const Table t = generate(spec);
    CHECK(t.n_rows == 10000);
    CHECK(t.n_features() == 14);
    CHECK(t.has_target());
    CHECK(t.columns[*t.target_index].name == "failure");
    bool has_torque = false;
    for (const auto& c : t.columns) has_torque = has_torque || c.name == "torque";
    CHECK(has_torque);
}

TEST_CASE("label counts are exact, not binomial") {
    GeneratorSpec spec = default_generator(DataShape::backorder);
    spec.n_rows = 10000;
    spec.positive_rate = 0.01;
    spec.seed = 3;
    const Table t = generate(spec);
    std::size_t pos = 0;
    for (double v : t.target_values()) pos += v == 1.0;
    CHECK(pos == 100);

    spec.positive_rate = 0.05;
    spec.n_rows = 4321;
    const Table t2 = generate(spec);
    pos = 0;
    for (double v : t2.target_values()) pos += v == 1.0;
    CHECK(pos == std::size_t(std::llround(0.05 * 4321)));
}

TEST_CASE("generation is deterministic per seed") {
    GeneratorSpec spec = default_generator(DataShape::fraud);
    spec.n_rows = 500;
    spec.seed = 11;
    const Table a = generate(spec);
    const Table b = generate(spec);
    for (std::size_t j = 0; j < a.columns.size(); ++j) {
        CHECK(a.columns[j].numeric == b.columns[j].numeric);
        CHECK(a.columns[j].codes == b.columns[j].codes);
    }
    spec.seed = 12;
    const Table c = generate(spec);
    CHECK(a.columns[0].numeric != c.columns[0].numeric);
}

TEST_CASE("zero signal leaves learners at chance") {
    GeneratorSpec spec;
    spec.shape = DataShape::backorder;
    spec.n_rows = 600;
    spec.n_numeric = 4;
    spec.n_categorical = 1;
    spec.cardinalities = {3};
    spec.positive_rate = 0.5;
    spec.signal_strength = 0.0;
    spec.seed = 21;
    const Table t = generate(spec);
    LearnerSpec learner;
    learner.kind = LearnerKind::logistic_regression;
    PreprocessConfig prep;  // loo handles the categorical
    const EvalReport r = cross_validate(learner, t, 3, prep, ResampleSpec{}, SelectConfig{}, 5);
    CHECK(r.mean_auroc > 0.35);
    CHECK(r.mean_auroc < 0.65);
    CHECK(bayes_optimal_auroc(spec) == doctest::Approx(0.5));
}

TEST_CASE("strong separation pushes logistic regression past 0.99 auroc") {
    GeneratorSpec spec;
    spec.n_rows = 2000;
    spec.n_numeric = 6;
    spec.n_categorical = 0;
    spec.cardinalities = {};
    spec.positive_rate = 0.3;
    spec.signal_strength = 4.0;
    spec.seed = 8;
    const Table t = generate(spec);
    LearnerSpec learner;
    learner.kind = LearnerKind::logistic_regression;
    PreprocessConfig prep;
    prep.encoder = PreprocessConfig::Encoder::none;
    const EvalReport r = cross_validate(learner, t, 3, prep, ResampleSpec{}, SelectConfig{}, 5);
    CHECK(r.mean_auroc >= 0.99);
}

TEST_CASE("bayes ceiling has the numeric closed form without categoricals") {
    GeneratorSpec spec;
    spec.n_numeric = 5;
    spec.n_categorical = 0;
    spec.cardinalities = {};
    spec.signal_strength = 2.0;
    spec.noise = 0.0;
    const double expected = 0.5 * std::erfc(-(2.0 / std::sqrt(2.0)) / std::sqrt(2.0));
    CHECK(bayes_optimal_auroc(spec) == doctest::Approx(expected).epsilon(1e-12));
    spec.noise = 1.0;  // halves the separation
    const double damped = 0.5 * std::erfc(-(1.0 / std::sqrt(2.0)) / std::sqrt(2.0));
    CHECK(bayes_optimal_auroc(spec) == doctest::Approx(damped).epsilon(1e-12));
}

TEST_CASE("bayes ceiling grows with signal and bounds the learner") {
    GeneratorSpec spec = default_generator(DataShape::backorder);
    spec.n_rows = 1500;
    spec.positive_rate = 0.3;
    spec.signal_strength = 1.5;
    spec.seed = 31;
    const double ceiling = bayes_optimal_auroc(spec, 40000);
    GeneratorSpec weaker = spec;
    weaker.signal_strength = 0.5;
    CHECK(ceiling > bayes_optimal_auroc(weaker, 40000));
    CHECK(bayes_optimal_auroc(spec, 40000) == bayes_optimal_auroc(spec, 40000));

    const Table t = generate(spec);
    LearnerSpec learner;
    learner.kind = LearnerKind::logistic_regression;
    const EvalReport r =
        cross_validate(learner, t, 3, PreprocessConfig{}, ResampleSpec{}, SelectConfig{}, 6);
    CHECK(r.mean_auroc <= ceiling + 0.04);
}

TEST_CASE("categorical distributions depend on the class") {
    GeneratorSpec spec;
    spec.n_rows = 4000;
    spec.n_numeric = 1;
    spec.n_categorical = 1;
    spec.cardinalities = {4};
    spec.positive_rate = 0.5;
    spec.signal_strength = 6.0;
    spec.seed = 13;
    const Table t = generate(spec);
    const auto y = t.target_values();
    const Column& cat = t.columns[1];
    REQUIRE(cat.kind == ColumnKind::categorical);
    std::map<std::int32_t, double> pos_freq, neg_freq;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < t.n_rows; ++i) {
        if (y[i] == 1.0) {
            pos_freq[cat.codes[i]] += 1;
            ++n_pos;
        } else {
            neg_freq[cat.codes[i]] += 1;
            ++n_neg;
        }
    }
    double max_gap = 0;
    for (std::int32_t c = 0; c < 4; ++c)
        max_gap = std::max(max_gap,
                           std::abs(pos_freq[c] / double(n_pos) - neg_freq[c] / double(n_neg)));
    CHECK(max_gap > 0.05);
}

TEST_CASE("generator spec validation") {
    GeneratorSpec spec = default_generator(DataShape::fraud);
    spec.positive_rate = 0.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.positive_rate = 0.6;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = default_generator(DataShape::fraud);
    spec.cardinalities = {4, 12};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = default_generator(DataShape::fraud);
    spec.cardinalities[0] = 1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = default_generator(DataShape::fraud);
    spec.n_rows = 10;
    spec.positive_rate = 0.01;  // rounds to zero positives
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    CHECK_THROWS_AS(shape_from_string("orders"), ConfigError);
}

TEST_CASE("generator spec json round trip") {
    GeneratorSpec spec = default_generator(DataShape::failure);
    spec.signal_strength = 3.25;
    spec.seed = 99;
    const GeneratorSpec back = GeneratorSpec::from_json(spec.to_json());
    CHECK(back.shape == DataShape::failure);
    CHECK(back.n_rows == spec.n_rows);
    CHECK(back.n_numeric == spec.n_numeric);
    CHECK(back.cardinalities == spec.cardinalities);
    CHECK(back.positive_rate == spec.positive_rate);
    CHECK(back.signal_strength == 3.25);
    CHECK(back.seed == 99);
}

TEST_CASE("shapes produce their themed schemas") {
    const Table fraud = generate([] {
        GeneratorSpec s = default_generator(DataShape::fraud);
        s.n_rows = 50;
        return s;
    }());
    CHECK(fraud.columns[*fraud.target_index].name == "is_fraud");
    const Table backorder = generate([] {
        GeneratorSpec s = default_generator(DataShape::backorder);
        s.n_rows = 50;
        return s;
    }());
    CHECK(backorder.columns[*backorder.target_index].name == "went_on_backorder");
    bool has_lead_time = false;
    for (const auto& c : backorder.columns) has_lead_time = has_lead_time || c.name == "lead_time";
    CHECK(has_lead_time);
    // overriding the counts falls back to generic names
    GeneratorSpec wide = default_generator(DataShape::backorder);
    wide.n_rows = 30;
    wide.n_numeric = 14;
    const Table t = generate(wide);
    CHECK(t.columns[13].name == "f13");
}
