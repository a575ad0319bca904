#pragma once

#include "fluxbench/gbt.hpp"
#include "fluxbench/scenarios.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace fluxbench {

enum class Origin { Train, Test };

/// Rows pooled over a domain set, tagged with where they came from.
struct PooledSample {
    Matrix x;
    std::vector<double> y;
    Origin origin = Origin::Train;

    std::size_t size() const { return y.size(); }
    PooledSample select(std::span<const std::size_t> idx) const;
};

PooledSample make_pool(const Dataset& ds, std::span<const DomainKey> domains, Target target, Origin origin);

struct WeightSpec {
    double epsilon = 0.1;
    double clip_quantile = 0.99;

    void validate() const;  // throws InvalidConfig
};

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n - 1); 0 for a single value
};
MeanSd mean_sd(std::span<const double> values);

/// Models used inside the diagnostics. Both fits early-stop on an internal holdout.
struct DiagnosticConfig {
    GbtConfig classifier;
    GbtConfig regressor;
    double holdout_fraction = 0.1;
    int n_repeats = 10;
    WeightSpec weights;
    std::size_t min_pool_rows = 20;
    std::size_t min_part_rows = 100;

    DiagnosticConfig();
};

/// Fits on a random (1 - holdout) share and early-stops on the rest.
GbtModel fit_with_holdout(const Rows& rows, GbtConfig cfg, double holdout_fraction, std::uint64_t seed);

/// Classifier rows: train-origin rows labelled 0, test-origin rows labelled 1.
Rows domain_rows(const Matrix& train_x, const Matrix& test_x);

/// 0.5 * (TPR + TNR) with "test" predicted when score >= threshold.
double balanced_accuracy(std::span<const double> scores, std::span<const double> labels, double threshold = 0.5);

struct CovariateShiftResult {
    MeanSd balanced_accuracy;
    std::vector<double> per_repeat;
};

/// Domain-classifier balanced accuracy over random half splits. Throws PoolTooSmall.
CovariateShiftResult covariate_shift_score(const PooledSample& train, const PooledSample& test, std::uint64_t seed,
                                           const DiagnosticConfig& cfg = {});

// ---- importance weights ------------------------------------------------------------

/// Test rows: 0 when s >= 1 - eps, else (1 - s) / s; nonzero weights then clipped.
std::vector<double> test_weights(std::span<const double> scores, const WeightSpec& spec);
/// Train rows are retained iff s > eps.
std::vector<bool> train_retained(std::span<const double> scores, double epsilon);
/// Nonzero weights clipped at their clip_quantile inverted-CDF quantile
/// (smallest value with empirical CDF >= q).
std::vector<double> clip_weights(std::span<const double> weights, double clip_quantile);
/// Shared-support weights: s / alpha for retained train rows, (1 - s) / (1 - alpha) for
/// retained test rows; trimmed rows get 0; nonzero weights clipped.
std::vector<double> shared_weights(std::span<const double> scores, Origin origin, double alpha,
                                   const WeightSpec& spec);

/// Weights per row of `x` from a fitted domain classifier. Train rows get 1 when retained
/// and 0 otherwise; test rows get test_weights.
std::vector<double> importance_weights(const Predictor& classifier, const Matrix& x, Origin origin,
                                       const WeightSpec& spec);

/// (sum w v) / (sum w) over w > 0. Equal weights take the unweighted path, so a common
/// weight reproduces the plain mean bit-for-bit. NaN when no weight is positive.
double weighted_mean(std::span<const double> values, std::span<const double> weights);
double weighted_rmse(std::span<const double> prediction, std::span<const double> truth,
                     std::span<const double> weights);

struct RetainedFraction {
    double train = 0.0;  // held-out training rows retained
    double test = 0.0;   // evaluation test rows retained
};

struct ConditionalShiftResult {
    MeanSd percent_increase;
    std::vector<double> per_repeat;
    std::vector<RetainedFraction> retained;
    double alpha = 0.0;  // shared-support variant only; last repeat's value
};

/// 100 * (importance-weighted test RMSE / held-out train RMSE - 1), train-marginal reference.
/// Throws PoolTooSmall, AllTrimmed.
ConditionalShiftResult conditional_shift_train_marginal(const PooledSample& train, const PooledSample& test,
                                                        std::uint64_t seed, const DiagnosticConfig& cfg = {});
/// Same comparison under the shared-support reference marginal.
ConditionalShiftResult conditional_shift_shared(const PooledSample& train, const PooledSample& test,
                                                std::uint64_t seed, const DiagnosticConfig& cfg = {});

// ---- relationship curves -----------------------------------------------------------

struct RelationshipCurve {
    std::string covariate;
    std::vector<double> edges;              // n_bins + 1, strictly increasing
    std::vector<double> train_means;        // NaN where undefined
    std::vector<double> test_weighted_means;
    std::vector<std::size_t> train_counts;  // retained rows per bin
    std::vector<std::size_t> test_counts;
};

/// Linear-interpolation percentile (rank 1 + (n - 1) q) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Intersection of the per-pool [lo, hi] percentile intervals. Throws EmptySupport.
std::pair<double, double> common_support(std::span<const double> a, std::span<const double> b, double lo_pct,
                                         double hi_pct);

/// Per-bin means given precomputed weights. Rows outside [edges.front(), edges.back()] are skipped.
RelationshipCurve bin_means(std::string covariate, std::vector<double> edges, std::span<const double> train_cov,
                            std::span<const double> train_values, std::span<const double> train_weights,
                            std::span<const double> test_cov, std::span<const double> test_values,
                            std::span<const double> test_weights);

struct CurveOptions {
    std::size_t n_bins = 10;
    double lo_pct = 5.0;
    double hi_pct = 95.0;
    std::uint64_t seed = 0;
};

/// Observed-target curve; weights come from a classifier fitted on every covariate but the binned one.
RelationshipCurve binned_curve(const PooledSample& train, const PooledSample& test, std::string_view covariate,
                               const DiagnosticConfig& cfg = {}, const CurveOptions& opt = {});

/// Model-based curve on thirds: regressors, evaluation, classifier. Throws PoolTooSmall, EmptySupport.
RelationshipCurve model_based_curve(const PooledSample& train, const PooledSample& test, std::string_view covariate,
                                    const DiagnosticConfig& cfg = {}, const CurveOptions& opt = {});

// ---- serialization -----------------------------------------------------------------

struct ShiftReport {
    std::string scenario;
    std::string target;
    std::uint64_t seed = 0;
    int n_repeats = 0;
    CovariateShiftResult covariate;
    std::optional<ConditionalShiftResult> train_marginal;
    std::optional<ConditionalShiftResult> shared;
    std::vector<std::string> notes;  // recorded failures such as AllTrimmed
};

nlohmann::json to_json(const ShiftReport& report);
nlohmann::json to_json(const RelationshipCurve& curve);
/// "bin_center,value" rows for one curve series.
std::string curve_plot_data(const RelationshipCurve& curve, bool test_series);

}  // namespace fluxbench
