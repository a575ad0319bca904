#pragma once

#include "fluxbench/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fluxbench {

/// Evaluation unit: a whole site, or one calendar year of a site.
struct DomainKey {
    SiteId site;
    std::optional<int> year;

    static DomainKey of_site(SiteId s) { return {std::move(s), std::nullopt}; }
    static DomainKey of_site_year(SiteId s, int y) { return {std::move(s), y}; }

    bool is_site_year() const { return year.has_value(); }
    std::string to_string() const;  // "SITE" or "SITE:YEAR"
    static DomainKey parse(std::string_view text);

    auto operator<=>(const DomainKey&) const = default;
};

enum class ScenarioKind { Temporal, Spatial, Temperature };
std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);
inline constexpr std::array<ScenarioKind, 3> kAllScenarios = {ScenarioKind::Temporal, ScenarioKind::Spatial,
                                                               ScenarioKind::Temperature};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Spatial;
    std::uint64_t seed = 0;
    std::size_t n_test = 40;
    std::size_t n_val_sites = 20;
};

struct TemporalRules {
    int min_years = 5;
    int validation_year = 2018;
    int first_test_year = 2019;
};

/// Train/validation/test domains for one scenario. Each set is sorted.
struct ScenarioSplit {
    ScenarioKind kind = ScenarioKind::Spatial;
    std::uint64_t seed = 0;
    std::vector<DomainKey> train;
    std::vector<DomainKey> validation;
    std::vector<DomainKey> test;
};

ScenarioSplit build_temporal(const Dataset& ds, const TemporalRules& rules = {});
ScenarioSplit build_spatial(const Dataset& ds, std::uint64_t seed, std::size_t n_test = 40, std::size_t n_val = 20);
ScenarioSplit build_temperature(const Dataset& ds, std::uint64_t seed, std::size_t n_test = 40,
                                std::size_t n_val = 20);
ScenarioSplit build_scenario(const Dataset& ds, const ScenarioSpec& spec);

/// Mean over years of the per-year mean of valid hourly TA. Throws NoValidTa.
double site_mean_annual_ta(const Dataset& ds, const SiteId& site);

nlohmann::json to_json(const ScenarioSplit& split);
ScenarioSplit split_from_json(const nlohmann::json& j);

}  // namespace fluxbench
