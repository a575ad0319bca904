#pragma once

#include "fluxbench/gbt.hpp"
#include "fluxbench/predictor.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fluxbench {

class ConstantPredictor final : public Predictor {
public:
    explicit ConstantPredictor(double value) : value_(value) {}

    std::string_view kind() const override { return "constant"; }
    double predict(std::span<const double>) const override { return value_; }
    nlohmann::json to_json() const override;
    double value() const { return value_; }

private:
    double value_;
};

/// Affine model intercept + coefficients . x over the expanded feature vector.
class LinearPredictor final : public Predictor {
public:
    LinearPredictor(double intercept, std::vector<double> coefficients)
        : intercept_(intercept), coefficients_(std::move(coefficients)) {}

    std::string_view kind() const override { return "ols"; }
    double predict(std::span<const double> x) const override;
    nlohmann::json to_json() const override;

    double intercept() const { return intercept_; }
    std::span<const double> coefficients() const { return coefficients_; }

private:
    double intercept_;
    std::vector<double> coefficients_;
};

/// Training-target mean. Throws EmptyTraining.
ConstantPredictor fit_constant(const Rows& rows);

/// Unregularized least squares on centred columns. Rank-deficient systems get a diagonal
/// jitter of 1e-8 * trace / p, followed by iterated refinement that converges to the
/// minimum-norm solution. Throws EmptyTraining.
LinearPredictor fit_ols(const Rows& rows);

/// Random-search bounds for boosted-tree hyperparameters.
struct GbtRanges {
    int n_trees_min = 100, n_trees_max = 1000;
    int depth_min = 3, depth_max = 10;
    double lr_min = 1e-3, lr_max = 0.3;  // log-uniform
    double subsample_min = 0.6, subsample_max = 1.0;
    int early_stopping_rounds = 50;
};

struct TunerSpec {
    int n_configs = 10;
    std::uint64_t seed = 0;
    GbtRanges ranges;
};

std::vector<GbtConfig> draw_configs(const TunerSpec& spec);

struct TunedGbt {
    GbtModel model;
    GbtConfig config;
    std::size_t selected = 0;
    std::vector<double> validation_rmse;  // one per candidate, in draw order
};

/// Fits every candidate and keeps the minimum validation RMSE (first drawn wins ties).
/// Throws EmptyValidation.
TunedGbt select_gbt(const Rows& train, const Rows& validation, std::span<const GbtConfig> candidates);
TunedGbt random_search(const Rows& train, const Rows& validation, const TunerSpec& spec);

double rmse(std::span<const double> prediction, std::span<const double> truth);

/// External predictions keyed by (site, hour).
struct PredictionSet {
    std::string model_name;
    std::map<std::pair<SiteId, HourTimestamp>, double> entries;

    const double* find(const SiteId& site, HourTimestamp t) const;
};

/// CSV with columns site, time, value. Throws ParseError / DuplicateKey.
PredictionSet import_predictions(std::istream& in, std::string model_name);
PredictionSet import_predictions(const std::filesystem::path& path, std::string model_name = {});
void write_predictions(const PredictionSet& set, std::ostream& out);

}  // namespace fluxbench
