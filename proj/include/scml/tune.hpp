#pragma once

#include <functional>
#include <map>

#include <json.hpp>

#include "scml/evaluate.hpp"

namespace scml {

enum class ParamScale { linear, log_scale };
enum class ParamType { real, integer };

/// One tunable dimension: either an explicit grid of values or a bounded
/// range with a sampling scale.
struct ParamDim {
    std::string name;
    std::vector<double> grid;
    bool has_range = false;
    double lo = 0.0, hi = 0.0;
    ParamScale scale = ParamScale::linear;
    ParamType type = ParamType::real;

    nlohmann::json to_json() const;
    static ParamDim from_json(const nlohmann::json& j);
};

struct ParamSpace {
    std::vector<ParamDim> dims;

    void validate() const;  // lo < hi, log needs lo > 0, grids nonempty
    nlohmann::json to_json() const;
    static ParamSpace from_json(const nlohmann::json& j);
};

/// Grid dimensions rewritten as [min, max] ranges so the Bayesian searcher
/// can use them: integer type when every grid value is integral, log scale
/// when the values are positive and span at least two decades.
ParamSpace space_to_ranges(const ParamSpace& space);

enum class TuneLoss { one_minus_auroc, one_minus_accuracy, one_minus_precision };

TuneLoss tune_loss_from_string(const std::string& s);
std::string to_string(TuneLoss loss);

/// What one trial minimizes: 1 - a mean cross-validated metric of the learner
/// with the trial's parameters overlaid.
struct Objective {
    LearnerSpec learner;
    TuneLoss loss = TuneLoss::one_minus_auroc;
    std::size_t k_folds = 3;
    std::uint64_t seed = 0;
    PreprocessConfig prep;
    ResampleSpec resample;
    SelectConfig select;
};

struct Trial {
    std::map<std::string, double> params;
    double cv_loss = 0.0;
    nlohmann::json metrics;
    double seconds = 0.0;

    nlohmann::json to_json() const;
};

struct TuningResult {
    std::string method;
    std::vector<Trial> trials;
    std::map<std::string, double> best_params;
    double best_loss = 0.0;
    std::map<std::string, double> sensitivity;  // filled by param_sensitivity

    nlohmann::json to_json() const;
};

using TrialFn = std::function<Trial(const std::map<std::string, double>&)>;

Trial evaluate_objective(const Objective& objective, const std::map<std::string, double>& params,
                         const Table& table);

/// Exhaustive sweep of the Cartesian product of the grids, first dimension
/// most significant; ties on loss keep the earliest trial.
TuningResult grid_search(const TrialFn& fn, const ParamSpace& space);
TuningResult grid_search(const Objective& objective, const ParamSpace& space, const Table& table);

/// Exactly `budget` independent draws, uniform per dimension (log-uniform on
/// log-scaled ranges).
TuningResult random_search(const TrialFn& fn, const ParamSpace& space, std::size_t budget,
                           std::uint64_t seed);
TuningResult random_search(const Objective& objective, const ParamSpace& space,
                           std::size_t budget, std::uint64_t seed, const Table& table);

/// n_init random trials, then EI-guided trials under a Gaussian-process
/// surrogate on the unit cube until `budget` trials total.
TuningResult bayes_search(const TrialFn& fn, const ParamSpace& space, std::size_t budget,
                          std::size_t n_init, std::uint64_t seed);
TuningResult bayes_search(const Objective& objective, const ParamSpace& space,
                          std::size_t budget, std::size_t n_init, std::uint64_t seed,
                          const Table& table);

/// One-at-a-time perturbation of each tuned parameter around the optimum;
/// reports the largest loss increase seen per parameter.
std::map<std::string, double> param_sensitivity(const TrialFn& fn, const ParamSpace& space,
                                                const std::map<std::string, double>& best_params,
                                                double best_loss);

/// Documented default search grids; every learner kind has one (possibly
/// empty when the learner exposes no tunable knobs).
ParamSpace default_space(LearnerKind kind);

}  // namespace scml
