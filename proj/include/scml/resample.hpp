#pragma once

#include <json.hpp>

#include "scml/tabular.hpp"

namespace scml {

enum class ResampleMethod { none, smote, random_over, random_under };

ResampleMethod resample_method_from_string(const std::string& s);
std::string to_string(ResampleMethod m);

struct ResampleSpec {
    ResampleMethod method = ResampleMethod::none;
    int k_neighbors = 5;
    double target_ratio = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static ResampleSpec from_json(const nlohmann::json& j);
};

Table smote(const Table& table, const ResampleSpec& spec);
Table random_over(const Table& table, const ResampleSpec& spec);
Table random_under(const Table& table, const ResampleSpec& spec);

// Dispatch on spec.method; none is the identity.
Table resample(const Table& table, const ResampleSpec& spec);

}  // namespace scml
