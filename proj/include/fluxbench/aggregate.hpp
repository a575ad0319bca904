#pragma once

#include "fluxbench/scenarios.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fluxbench {

enum class Scale { Hourly, Daily, Weekly, Seasonal, Anomaly, Iav, SiteMean };
inline constexpr std::array<Scale, 7> kAllScales = {Scale::Hourly,  Scale::Daily, Scale::Weekly,  Scale::Seasonal,
                                                    Scale::Anomaly, Scale::Iav,   Scale::SiteMean};
std::string_view to_string(Scale scale);
std::optional<Scale> parse_scale(std::string_view text);

/// Minimum-contribution thresholds.
struct AggregationRules {
    std::size_t min_hours_per_day = 12;
    std::size_t min_days_per_week = 4;
    std::size_t min_years_per_doy = 2;
    std::size_t min_days_per_year = 183;
};

struct AlignedPoint {
    HourTimestamp time;
    double truth = 0.0;
    double prediction = 0.0;  // NaN when the prediction set has no entry
    bool valid = false;       // truth passed QC
};

/// Time-ordered truth/prediction pairs for one domain.
struct AlignedSeries {
    DomainKey domain;
    std::vector<AlignedPoint> points;
};

/// Key meaning by scale: hourly = hours since epoch, daily/anomaly = day index,
/// weekly = ISO week_year * 100 + week, seasonal = day of year, iav = year, site_mean = 0.
struct AggregatedPair {
    std::int64_t key = 0;
    double truth = 0.0;
    double prediction = 0.0;
};

struct AggregatedPairs {
    DomainKey domain;
    Scale scale = Scale::Hourly;
    std::vector<AggregatedPair> pairs;  // sorted by key
    std::size_t missing_predictions = 0;
};

std::string format_key(Scale scale, std::int64_t key);

AggregatedPairs to_hourly(const AlignedSeries& s);
AggregatedPairs to_daily(const AlignedSeries& s, const AggregationRules& rules = {});
/// Throws WrongScale unless `daily` is daily.
AggregatedPairs to_weekly(const AggregatedPairs& daily, const AggregationRules& rules = {});
/// Mean seasonal cycle keyed by day of year (366 kept as its own key). Throws WrongScale.
AggregatedPairs msc(const AggregatedPairs& daily, const AggregationRules& rules = {});
/// Each channel minus its own MSC; days without an MSC entry are dropped. Throws WrongScale.
AggregatedPairs anomalies(const AggregatedPairs& daily, const AggregatedPairs& seasonal);

struct YearlyMean {
    int year = 0;
    double truth = 0.0;
    double prediction = 0.0;
};
/// Yearly means of retained days for years in `basis` with enough days.
std::vector<YearlyMean> yearly_means(const AggregatedPairs& daily, const std::set<int>& basis,
                                     const AggregationRules& rules = {});
/// Yearly mean minus multi-year mean over basis years. Throws NoRetainedYears.
AggregatedPairs iav(const AggregatedPairs& daily, const std::set<int>& basis, const AggregationRules& rules = {});
/// One pair: mean of retained yearly means over basis years. Throws NoRetainedYears.
AggregatedPairs site_mean(const AggregatedPairs& daily, const std::set<int>& basis,
                          const AggregationRules& rules = {});

/// Applies the scenario's grouping: hourly/daily/weekly/anomaly per domain (site-year for
/// temporal, site otherwise); seasonal, iav and site_mean per site. IAV/site-mean basis is the
/// set of years in the site's test domains (temporal) or every year present (spatial/temperature).
/// Groups that retain nothing are dropped. Output order is by domain key.
std::vector<AggregatedPairs> aggregate_for_scenario(std::span<const AlignedSeries> series, ScenarioKind kind,
                                                    Scale scale, const AggregationRules& rules = {});
std::vector<AggregatedPairs> aggregate_for_scenario_serial(std::span<const AlignedSeries> series, ScenarioKind kind,
                                                           Scale scale, const AggregationRules& rules = {});

/// CSV "key,truth,prediction".
std::string to_csv(const AggregatedPairs& pairs);

}  // namespace fluxbench
