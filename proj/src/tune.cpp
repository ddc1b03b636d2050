#include "scml/tune.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "scml/parallel.hpp"

namespace scml {

using nlohmann::json;

json ParamDim::to_json() const {
    json j{{"name", name}};
    if (has_range) {
        j["range"] = {lo, hi};
        j["scale"] = scale == ParamScale::log_scale ? "log" : "linear";
        j["type"] = type == ParamType::integer ? "integer" : "real";
    } else {
        j["grid"] = grid;
    }
    return j;
}

ParamDim ParamDim::from_json(const json& j) {
    ParamDim d;
    d.name = j.at("name").get<std::string>();
    if (j.contains("range")) {
        d.has_range = true;
        d.lo = j.at("range").at(0).get<double>();
        d.hi = j.at("range").at(1).get<double>();
        const std::string scale = j.value("scale", "linear");
        if (scale == "log")
            d.scale = ParamScale::log_scale;
        else if (scale != "linear")
            throw ConfigError("unknown scale '" + scale + "'");
        const std::string type = j.value("type", "real");
        if (type == "integer")
            d.type = ParamType::integer;
        else if (type != "real")
            throw ConfigError("unknown param type '" + type + "'");
    } else {
        d.grid = j.at("grid").get<std::vector<double>>();
    }
    return d;
}

void ParamSpace::validate() const {
    for (const auto& d : dims) {
        if (d.name.empty()) throw ConfigError("param dimension without a name");
        if (d.has_range) {
            if (!(d.lo < d.hi))
                throw ConfigError("param '" + d.name + "': range needs lo < hi");
            if (d.scale == ParamScale::log_scale && !(d.lo > 0))
                throw ConfigError("param '" + d.name + "': log scale needs lo > 0");
        } else if (d.grid.empty()) {
            throw ConfigError("param '" + d.name + "' has an empty grid");
        }
    }
}

json ParamSpace::to_json() const {
    json arr = json::array();
    for (const auto& d : dims) arr.push_back(d.to_json());
    return json{{"dims", arr}};
}

ParamSpace ParamSpace::from_json(const json& j) {
    ParamSpace s;
    for (const auto& dj : j.at("dims")) s.dims.push_back(ParamDim::from_json(dj));
    s.validate();
    return s;
}

ParamSpace space_to_ranges(const ParamSpace& space) {
    space.validate();
    ParamSpace out;
    for (const auto& d : space.dims) {
        if (d.has_range) {
            out.dims.push_back(d);
            continue;
        }
        ParamDim r;
        r.name = d.name;
        r.has_range = true;
        r.lo = *std::min_element(d.grid.begin(), d.grid.end());
        r.hi = *std::max_element(d.grid.begin(), d.grid.end());
        if (!(r.lo < r.hi))
            throw ConfigError("param '" + d.name + "': a single-point grid cannot become a range");
        bool integral = true;
        for (double v : d.grid) integral = integral && v == std::floor(v);
        r.type = integral ? ParamType::integer : ParamType::real;
        r.scale = (r.lo > 0 && r.hi / r.lo >= 100.0) ? ParamScale::log_scale : ParamScale::linear;
        out.dims.push_back(r);
    }
    return out;
}

TuneLoss tune_loss_from_string(const std::string& s) {
    if (s == "auroc") return TuneLoss::one_minus_auroc;
    if (s == "accuracy") return TuneLoss::one_minus_accuracy;
    if (s == "precision") return TuneLoss::one_minus_precision;
    throw ConfigError("unknown tuning loss '" + s + "' (auroc, accuracy, precision)");
}

std::string to_string(TuneLoss loss) {
    switch (loss) {
        case TuneLoss::one_minus_auroc: return "auroc";
        case TuneLoss::one_minus_accuracy: return "accuracy";
        case TuneLoss::one_minus_precision: return "precision";
    }
    return "auroc";
}

json Trial::to_json() const {
    return json{{"params", params}, {"cv_loss", cv_loss}, {"metrics", metrics},
                {"seconds", seconds}};
}

json TuningResult::to_json() const {
    json trial_array = json::array();
    for (const auto& t : trials) trial_array.push_back(t.to_json());
    return json{{"method", method},
                {"trials", trial_array},
                {"best_params", best_params},
                {"best_loss", best_loss},
                {"sensitivity", sensitivity}};
}

Trial evaluate_objective(const Objective& objective, const std::map<std::string, double>& params,
                         const Table& table) {
    LearnerSpec spec = objective.learner;
    for (const auto& [name, value] : params) spec.params[name] = value;
    Stopwatch watch;
    const EvalReport r = cross_validate(spec, table, objective.k_folds, objective.prep,
                                        objective.resample, objective.select, objective.seed);
    Trial t;
    t.params = params;
    t.seconds = watch.seconds();
    t.metrics = json{{"mean_auroc", r.mean_auroc},
                     {"mean_accuracy", r.mean_accuracy},
                     {"mean_precision", r.mean_precision},
                     {"mean_recall", r.mean_recall},
                     {"mean_f1", r.mean_f1}};
    double metric = 0;
    switch (objective.loss) {
        case TuneLoss::one_minus_auroc: metric = r.mean_auroc; break;
        case TuneLoss::one_minus_accuracy: metric = r.mean_accuracy; break;
        case TuneLoss::one_minus_precision: metric = r.mean_precision; break;
    }
    t.cv_loss = std::clamp(1.0 - metric, 0.0, 1.0);
    return t;
}

namespace {

// Evaluates a fixed list of parameter sets concurrently, then reduces in list
// order so ties keep the earliest trial.
TuningResult run_trials(const TrialFn& fn, std::vector<std::map<std::string, double>> sets,
                        std::string method) {
    TuningResult result;
    result.method = std::move(method);
    result.trials.resize(sets.size());
    parallel_for(sets.size(), [&](std::size_t i) { result.trials[i] = fn(sets[i]); });
    result.best_loss = std::numeric_limits<double>::infinity();
    for (const auto& t : result.trials) {
        if (t.cv_loss < result.best_loss) {
            result.best_loss = t.cv_loss;
            result.best_params = t.params;
        }
    }
    return result;
}

double sample_dim(const ParamDim& d, Rng& rng) {
    if (!d.has_range) return d.grid[std::size_t(rng.uniform_int(0, std::int64_t(d.grid.size()) - 1))];
    const double u = rng.uniform01();
    double v = d.scale == ParamScale::log_scale
                   ? std::exp(std::log(d.lo) + u * (std::log(d.hi) - std::log(d.lo)))
                   : d.lo + u * (d.hi - d.lo);
    if (d.type == ParamType::integer) v = std::clamp(double(std::llround(v)), d.lo, d.hi);
    return v;
}

}  // namespace

TuningResult grid_search(const TrialFn& fn, const ParamSpace& space) {
    space.validate();
    for (const auto& d : space.dims)
        if (d.has_range)
            throw ConfigError("param '" + d.name + "': grid search needs explicit grids");
    std::vector<std::map<std::string, double>> sets;
    const std::size_t nd = space.dims.size();
    std::vector<std::size_t> odometer(nd, 0);
    bool done = false;
    while (!done) {
        std::map<std::string, double> params;
        for (std::size_t i = 0; i < nd; ++i)
            params[space.dims[i].name] = space.dims[i].grid[odometer[i]];
        sets.push_back(std::move(params));
        // advance the last dimension fastest: lexicographic order overall
        done = true;
        for (std::size_t i = nd; i-- > 0;) {
            if (++odometer[i] < space.dims[i].grid.size()) {
                done = false;
                break;
            }
            odometer[i] = 0;
        }
    }
    return run_trials(fn, std::move(sets), "grid");
}

TuningResult random_search(const TrialFn& fn, const ParamSpace& space, std::size_t budget,
                           std::uint64_t seed) {
    space.validate();
    if (budget < 1) throw ConfigError("random search needs budget >= 1");
    Rng rng(seed);
    std::vector<std::map<std::string, double>> sets(budget);
    for (auto& params : sets)
        for (const auto& d : space.dims) params[d.name] = sample_dim(d, rng);
    return run_trials(fn, std::move(sets), "random");
}

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct CubeMap {
    const ParamSpace& space;

    double to_unit(std::size_t dim, double v) const {
        const ParamDim& d = space.dims[dim];
        if (d.scale == ParamScale::log_scale)
            return (std::log(v) - std::log(d.lo)) / (std::log(d.hi) - std::log(d.lo));
        return (v - d.lo) / (d.hi - d.lo);
    }

    double from_unit(std::size_t dim, double u) const {
        const ParamDim& d = space.dims[dim];
        double v = d.scale == ParamScale::log_scale
                       ? std::exp(std::log(d.lo) + u * (std::log(d.hi) - std::log(d.lo)))
                       : d.lo + u * (d.hi - d.lo);
        if (d.type == ParamType::integer) v = std::clamp(double(std::llround(v)), d.lo, d.hi);
        return v;
    }
};

}  // namespace

TuningResult bayes_search(const TrialFn& fn, const ParamSpace& space, std::size_t budget,
                          std::size_t n_init, std::uint64_t seed) {
    space.validate();
    if (space.dims.empty())
        throw ConfigError("bayes search has nothing to tune: the space is empty");
    for (const auto& d : space.dims)
        if (!d.has_range)
            throw ConfigError("param '" + d.name +
                              "': bayes search needs ranges; use grid or random search");
    if (n_init < 1) throw ConfigError("bayes search needs n_init >= 1");
    if (budget <= n_init) throw ConfigError("bayes search needs budget > n_init");

    const std::size_t m = space.dims.size();
    const CubeMap cube{space};
    Rng rng(seed);
    TuningResult result;
    result.method = "bayes";

    std::vector<std::vector<double>> points;  // unit-cube coordinates, as evaluated
    auto run_at = [&](const std::map<std::string, double>& params) {
        Trial t = fn(params);
        std::vector<double> u(m);
        for (std::size_t j = 0; j < m; ++j) u[j] = cube.to_unit(j, params.at(space.dims[j].name));
        points.push_back(std::move(u));
        result.trials.push_back(std::move(t));
    };

    for (std::size_t i = 0; i < n_init; ++i) {
        std::map<std::string, double> params;
        for (const auto& d : space.dims) params[d.name] = sample_dim(d, rng);
        run_at(params);
    }

    constexpr std::size_t kCandidates = 256;
    constexpr double kNoise = 1e-6;
    while (result.trials.size() < budget) {
        const std::size_t n = points.size();
        // squared-exponential kernel; length scale by the median heuristic
        std::vector<double> dists;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                double s = 0;
                for (std::size_t j = 0; j < m; ++j) {
                    const double diff = points[a][j] - points[b][j];
                    s += diff * diff;
                }
                dists.push_back(std::sqrt(s));
            }
        double length = 1.0;
        if (!dists.empty()) {
            std::sort(dists.begin(), dists.end());
            const double median = dists[dists.size() / 2];
            if (median > 0) length = median;
        }
        const double inv2l2 = 1.0 / (2.0 * length * length);

        Eigen::MatrixXd K(n, n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                double s = 0;
                for (std::size_t j = 0; j < m; ++j) {
                    const double diff = points[a][j] - points[b][j];
                    s += diff * diff;
                }
                K(Eigen::Index(a), Eigen::Index(b)) = std::exp(-s * inv2l2) + (a == b ? kNoise : 0.0);
            }
        double y_mean = 0;
        for (const auto& t : result.trials) y_mean += t.cv_loss;
        y_mean /= double(n);
        Eigen::VectorXd y(n);
        for (std::size_t a = 0; a < n; ++a) y(Eigen::Index(a)) = result.trials[a].cv_loss - y_mean;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
        const Eigen::VectorXd alpha = ldlt.solve(y);

        double f_min = std::numeric_limits<double>::infinity();
        for (const auto& t : result.trials) f_min = std::min(f_min, t.cv_loss);

        std::vector<double> best_u(m);
        double best_ei = -1;
        for (std::size_t c = 0; c < kCandidates; ++c) {
            std::vector<double> u(m);
            for (std::size_t j = 0; j < m; ++j) u[j] = rng.uniform01();
            Eigen::VectorXd ks(n);
            for (std::size_t a = 0; a < n; ++a) {
                double s = 0;
                for (std::size_t j = 0; j < m; ++j) {
                    const double diff = u[j] - points[a][j];
                    s += diff * diff;
                }
                ks(Eigen::Index(a)) = std::exp(-s * inv2l2);
            }
            const double mu = y_mean + ks.dot(alpha);
            const double var = std::max(1.0 - ks.dot(ldlt.solve(ks)), 0.0);
            const double sd = std::sqrt(var);
            const double improvement = f_min - mu;
            double ei;
            if (sd < 1e-12)
                ei = std::max(improvement, 0.0);
            else {
                const double z = improvement / sd;
                ei = improvement * normal_cdf(z) + sd * normal_pdf(z);
            }
            if (ei > best_ei) {
                best_ei = ei;
                best_u = u;
            }
        }
        std::map<std::string, double> params;
        for (std::size_t j = 0; j < m; ++j)
            params[space.dims[j].name] = cube.from_unit(j, best_u[j]);
        run_at(params);
    }

    result.best_loss = std::numeric_limits<double>::infinity();
    for (const auto& t : result.trials) {
        if (t.cv_loss < result.best_loss) {
            result.best_loss = t.cv_loss;
            result.best_params = t.params;
        }
    }
    return result;
}

std::map<std::string, double> param_sensitivity(const TrialFn& fn, const ParamSpace& space,
                                                const std::map<std::string, double>& best_params,
                                                double best_loss) {
    space.validate();
    std::map<std::string, double> out;
    for (const auto& d : space.dims) {
        const auto it = best_params.find(d.name);
        if (it == best_params.end()) continue;
        const double best_value = it->second;
        std::vector<double> neighbors;
        if (!d.has_range) {
            // adjacent grid entries around the chosen value
            std::vector<double> grid = d.grid;
            std::sort(grid.begin(), grid.end());
            const auto pos = std::lower_bound(grid.begin(), grid.end(), best_value);
            if (pos != grid.begin()) neighbors.push_back(*(pos - 1));
            if (pos != grid.end() && pos + 1 != grid.end()) neighbors.push_back(*(pos + 1));
        } else {
            const double span = d.hi - d.lo;
            double step = d.type == ParamType::integer ? std::max(1.0, 0.05 * span) : 0.05 * span;
            if (d.type == ParamType::integer) step = std::floor(step);
            neighbors.push_back(std::clamp(best_value - step, d.lo, d.hi));
            neighbors.push_back(std::clamp(best_value + step, d.lo, d.hi));
        }
        double worst = 0;
        for (double v : neighbors) {
            if (v == best_value) continue;
            std::map<std::string, double> probe = best_params;
            probe[d.name] = v;
            worst = std::max(worst, fn(probe).cv_loss - best_loss);
        }
        out[d.name] = worst;
    }
    return out;
}

namespace {

TrialFn objective_fn(const Objective& objective, const Table& table) {
    return [&objective, &table](const std::map<std::string, double>& params) {
        return evaluate_objective(objective, params, table);
    };
}

ParamDim grid_dim(std::string name, std::vector<double> values) {
    ParamDim d;
    d.name = std::move(name);
    d.grid = std::move(values);
    return d;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(std::log(lo) + double(i) / double(n - 1) * (std::log(hi) - std::log(lo)));
    return g;
}

}  // namespace

TuningResult grid_search(const Objective& objective, const ParamSpace& space, const Table& table) {
    return grid_search(objective_fn(objective, table), space);
}

TuningResult random_search(const Objective& objective, const ParamSpace& space,
                           std::size_t budget, std::uint64_t seed, const Table& table) {
    return random_search(objective_fn(objective, table), space, budget, seed);
}

TuningResult bayes_search(const Objective& objective, const ParamSpace& space,
                          std::size_t budget, std::size_t n_init, std::uint64_t seed,
                          const Table& table) {
    return bayes_search(objective_fn(objective, table), space, budget, n_init, seed);
}

ParamSpace default_space(LearnerKind kind) {
    ParamSpace s;
    switch (kind) {
        case LearnerKind::logistic_regression:
            s.dims.push_back(grid_dim("l2", log_grid(1e-4, 1e2, 7)));
            break;
        case LearnerKind::decision_tree:
            s.dims.push_back(grid_dim("max_depth", {2, 4, 8, 16, 32}));
            break;
        case LearnerKind::bagging:
        case LearnerKind::random_forest:
            s.dims.push_back(grid_dim("n_estimators", {50, 100, 200}));
            break;
        case LearnerKind::adaboost:
        case LearnerKind::rusboost:
            s.dims.push_back(grid_dim("n_estimators", {50, 100, 200}));
            break;
        case LearnerKind::gradient_boosting:
            s.dims.push_back(grid_dim("learning_rate", log_grid(1e-3, 3e-1, 5)));
            s.dims.push_back(grid_dim("n_rounds", {50, 100, 200}));
            break;
        case LearnerKind::gaussian_nb:
            break;  // nothing to tune: one default trial
        case LearnerKind::knn:
            s.dims.push_back(grid_dim("k", {1, 3, 5, 9, 15}));
            break;
        case LearnerKind::linear_svm:
            s.dims.push_back(grid_dim("l2", log_grid(1e-4, 1e2, 7)));
            break;
        case LearnerKind::mlp:
            s.dims.push_back(grid_dim("hidden", {8, 16, 32}));
            s.dims.push_back(grid_dim("learning_rate", log_grid(1e-3, 3e-1, 5)));
            break;
        case LearnerKind::self_training:
            s.dims.push_back(grid_dim("confidence", {0.8, 0.9, 0.95, 0.99}));
            break;
        case LearnerKind::kmeans_anomaly:
            s.dims.push_back(grid_dim("k", {2, 4, 8, 16}));
            break;
    }
    s.validate();
    return s;
}

}  // namespace scml
