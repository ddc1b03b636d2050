#pragma once

#include <json.hpp>

#include "scml/tabular.hpp"

namespace scml {

enum class DataShape { fraud, failure, backorder };

DataShape shape_from_string(const std::string& s);
std::string to_string(DataShape shape);

/// Class-conditional Gaussian generator with exact-count labels. Numeric
/// features carry a total Mahalanobis separation of signal_strength between
/// the classes; categorical distributions are tilted by class with a strength
/// that also scales with signal_strength (and vanishes with it).
struct GeneratorSpec {
    DataShape shape = DataShape::backorder;
    std::size_t n_rows = 20000;
    std::size_t n_numeric = 12;
    std::size_t n_categorical = 3;
    std::vector<std::size_t> cardinalities = {2, 2, 2};
    double positive_rate = 0.05;
    double signal_strength = 2.0;
    double noise = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static GeneratorSpec from_json(const nlohmann::json& j);
};

/// Desk-scale presets for the three problem shapes.
GeneratorSpec default_generator(DataShape shape);

Table generate(const GeneratorSpec& spec);

/// AUROC of the true likelihood-ratio classifier under the generating
/// distribution: the ceiling no learner can beat in expectation. Closed form
/// when no categorical features are present, Monte Carlo on the exact
/// likelihood ratio otherwise (deterministic).
double bayes_optimal_auroc(const GeneratorSpec& spec, std::size_t n_mc = 100000);

}  // namespace scml
