#pragma once

#include "fluxbench/aggregate.hpp"
#include "fluxbench/models.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fluxbench {

enum class Statistic { Median, Q90 };
std::string_view to_string(Statistic s);
std::optional<Statistic> parse_statistic(std::string_view text);
double quantile_of(Statistic s);

struct DomainError {
    DomainKey domain;
    ScenarioKind scenario = ScenarioKind::Spatial;
    Scale scale = Scale::Hourly;
    std::string model;
    double rmse = 0.0;
    std::size_t n_pairs = 0;
};

/// Root mean squared (prediction - truth) over the retained pairs. Throws EmptyDomain.
DomainError domain_rmse(const AggregatedPairs& pairs, ScenarioKind scenario, std::string model);

/// Linear-interpolation quantile: for n sorted values the q-quantile sits at 1-based rank
/// 1 + (n - 1) q. Throws EmptySet.
double linear_quantile(std::vector<double> values, double q);

struct MetricCell {
    ScenarioKind scenario = ScenarioKind::Spatial;
    Scale scale = Scale::Hourly;
    std::string model;
    Statistic statistic = Statistic::Median;
    double value = 0.0;
    std::size_t n_domains = 0;
    bool low_support = false;
};

inline constexpr std::size_t kLowSupportDomains = 3;

/// Statistic over the domain RMSEs (all errors must share scenario, scale and model). Throws EmptySet.
MetricCell summarize(std::span<const DomainError> errors, Statistic statistic);

struct SkillCell {
    ScenarioKind scenario = ScenarioKind::Spatial;
    Scale scale = Scale::Hourly;
    double skill = 0.0;
};

struct SkillRow {
    std::string model;
    Statistic statistic = Statistic::Median;
    std::vector<SkillCell> cells;
    double overall = 0.0;  // unweighted mean over cells present for both model and reference
    std::vector<std::pair<ScenarioKind, Scale>> missing;  // reference cells the model lacks
};

/// 1 - E_model / E_reference per (scenario, scale). Throws ZeroReference when a used
/// reference value is not positive, CellMismatch when statistics differ or the model has a
/// cell the reference lacks.
SkillRow skill(std::span<const MetricCell> model_cells, std::span<const MetricCell> reference_cells);

/// Sorted (rmse, empirical CDF) support points; duplicate values collapse to their last step.
/// Throws EmptySet.
std::vector<std::pair<double, double>> cdf_export(std::span<const DomainError> errors);

// ---- report grid -------------------------------------------------------------------

/// Default table scales.
inline constexpr std::array<Scale, 6> kReportScales = {Scale::Hourly,  Scale::Weekly, Scale::Seasonal,
                                                       Scale::Anomaly, Scale::Iav,    Scale::SiteMean};

struct ScenarioPredictions {
    ScenarioSplit split;
    std::vector<PredictionSet> predictions;
};

struct ReportOptions {
    Target target = Target::Et;
    std::vector<Scale> scales{kReportScales.begin(), kReportScales.end()};
    std::vector<Statistic> statistics{Statistic::Median, Statistic::Q90};
    std::string reference = "ols";
    AggregationRules rules;
};

struct CellCount {
    ScenarioKind scenario = ScenarioKind::Spatial;
    Scale scale = Scale::Hourly;
    std::string model;
    std::size_t test_domains = 0;     // domains in the split
    std::size_t covered_domains = 0;  // domains with at least one matching prediction
    std::size_t scored_domains = 0;   // domains with retained pairs at this scale
};

struct MetricTable {
    Target target = Target::Et;
    std::vector<ScenarioKind> scenarios;
    std::vector<Scale> scales;
    std::vector<std::string> models;  // sorted
    std::vector<Statistic> statistics;
    std::string reference;
    std::vector<DomainError> errors;
    std::vector<MetricCell> cells;
    std::vector<SkillRow> skills;
    std::vector<CellCount> counts;
    std::vector<std::string> flags;

    const MetricCell* find(ScenarioKind scenario, Scale scale, std::string_view model, Statistic stat) const;
};

/// Aligns each prediction set with the dataset's test-domain hours and fills the full
/// (scenario x scale x model x statistic) grid plus one skill row per model and statistic.
/// Throws NoCoverage when no prediction matches any test domain, ZeroReference when the
/// reference model is absent or has a zero cell.
MetricTable build_report(const Dataset& ds, std::span<const ScenarioPredictions> inputs, const ReportOptions& options);

/// Truth/prediction series for each test domain of the split.
std::vector<AlignedSeries> align(const Dataset& ds, const ScenarioSplit& split, const PredictionSet& predictions,
                                 Target target);

nlohmann::json to_json(const MetricTable& table);
/// Rows = models, columns = (scenario, scale) cells then overall skill. `display_scale`
/// multiplies cell values for presentation only.
std::string table_csv(const MetricTable& table, Statistic statistic, double display_scale = 1.0);
std::string cdf_csv(std::span<const std::pair<double, double>> cdf);

}  // namespace fluxbench
