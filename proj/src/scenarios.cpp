#include "fluxbench/scenarios.hpp"

#include "fluxbench/error.hpp"
#include "fluxbench/rng.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

namespace fluxbench {

std::string DomainKey::to_string() const {
    return year ? fmt::format("{}:{}", site.str(), *year) : site.str();
}

DomainKey DomainKey::parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) return of_site(SiteId(std::string(text)));
    int y = 0;
    const auto tail = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), y);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) {
        throw Error(ErrorCode::ParseError, fmt::format("bad domain key '{}'", text));
    }
    return of_site_year(SiteId(std::string(text.substr(0, colon))), y);
}

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Temporal: return "temporal";
        case ScenarioKind::Spatial: return "spatial";
        case ScenarioKind::Temperature: return "temperature";
    }
    return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
    for (auto k : kAllScenarios) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

namespace {

bool has_valid_data(const SiteData& s) {
    return std::any_of(s.records.begin(), s.records.end(), [](const HourlyRecord& r) { return r.valid(); });
}

std::vector<SiteId> sites_with_data(const Dataset& ds) {
    std::vector<SiteId> out;
    for (const auto& s : ds.sites()) {
        if (has_valid_data(s)) out.push_back(s.meta.site);
    }
    return out;
}

std::vector<DomainKey> as_site_keys(std::vector<SiteId> ids) {
    std::sort(ids.begin(), ids.end());
    std::vector<DomainKey> out;
    out.reserve(ids.size());
    for (auto& id : ids) out.push_back(DomainKey::of_site(std::move(id)));
    return out;
}

void check_site_budget(std::size_t available, std::size_t n_test, std::size_t n_val) {
    if (n_test + n_val >= available) {
        throw Error(ErrorCode::TooFewSites,
                    fmt::format("{} sites available, need more than n_test + n_val = {}", available, n_test + n_val));
    }
}

}  // namespace

ScenarioSplit build_temporal(const Dataset& ds, const TemporalRules& rules) {
    ScenarioSplit split;
    split.kind = ScenarioKind::Temporal;
    for (const auto& s : ds.sites()) {
        const auto years = site_years(ds, s.meta.site);
        if (static_cast<int>(years.size()) < rules.min_years || !years.contains(rules.validation_year)) continue;
        for (int y : years) {
            auto key = DomainKey::of_site_year(s.meta.site, y);
            if (y < rules.validation_year) split.train.push_back(std::move(key));
            else if (y == rules.validation_year) split.validation.push_back(std::move(key));
            else if (y >= rules.first_test_year) split.test.push_back(std::move(key));
        }
    }
    if (split.validation.empty()) throw Error(ErrorCode::NoEligibleSites, "no site meets the temporal eligibility rule");
    return split;
}

ScenarioSplit build_spatial(const Dataset& ds, std::uint64_t seed, std::size_t n_test, std::size_t n_val) {
    auto ids = sites_with_data(ds);
    check_site_budget(ids.size(), n_test, n_val);
    SplitMix64 rng(seed);
    partial_shuffle(ids, n_test, rng);
    std::vector<SiteId> test(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<SiteId> rest(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
    std::sort(rest.begin(), rest.end());
    partial_shuffle(rest, n_val, rng);
    std::vector<SiteId> val(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<SiteId> train(rest.begin() + static_cast<std::ptrdiff_t>(n_val), rest.end());
    return {ScenarioKind::Spatial, seed, as_site_keys(std::move(train)), as_site_keys(std::move(val)),
            as_site_keys(std::move(test))};
}

double site_mean_annual_ta(const Dataset& ds, const SiteId& site) {
    std::map<int, std::pair<double, std::size_t>> per_year;
    for (const auto& r : ds.site(site).records) {
        if (!r.valid()) continue;
        auto& [sum, n] = per_year[r.time.year()];
        sum += r.features.continuous[kTaIndex];
        ++n;
    }
    if (per_year.empty()) throw Error(ErrorCode::NoValidTa, site.str());
    double total = 0.0;
    for (const auto& [year, acc] : per_year) total += acc.first / static_cast<double>(acc.second);
    return total / static_cast<double>(per_year.size());
}

ScenarioSplit build_temperature(const Dataset& ds, std::uint64_t seed, std::size_t n_test, std::size_t n_val) {
    auto ids = sites_with_data(ds);
    check_site_budget(ids.size(), n_test, n_val);
    std::vector<std::pair<double, SiteId>> ranked;
    ranked.reserve(ids.size());
    for (auto& id : ids) ranked.emplace_back(site_mean_annual_ta(ds, id), id);
    // Warmest first; ties resolved by the lexicographically smaller SiteId.
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<SiteId> test, rest;
    for (std::size_t i = 0; i < ranked.size(); ++i) (i < n_test ? test : rest).push_back(ranked[i].second);
    std::sort(rest.begin(), rest.end());
    SplitMix64 rng(seed);
    partial_shuffle(rest, n_val, rng);
    std::vector<SiteId> val(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<SiteId> train(rest.begin() + static_cast<std::ptrdiff_t>(n_val), rest.end());
    return {ScenarioKind::Temperature, seed, as_site_keys(std::move(train)), as_site_keys(std::move(val)),
            as_site_keys(std::move(test))};
}

ScenarioSplit build_scenario(const Dataset& ds, const ScenarioSpec& spec) {
    switch (spec.kind) {
        case ScenarioKind::Temporal: {
            auto split = build_temporal(ds);
            split.seed = spec.seed;
            return split;
        }
        case ScenarioKind::Spatial: return build_spatial(ds, spec.seed, spec.n_test, spec.n_val_sites);
        case ScenarioKind::Temperature: return build_temperature(ds, spec.seed, spec.n_test, spec.n_val_sites);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown scenario kind");
}

nlohmann::json to_json(const ScenarioSplit& split) {
    auto keys = [](const std::vector<DomainKey>& v) {
        auto arr = nlohmann::json::array();
        for (const auto& k : v) arr.push_back(k.to_string());
        return arr;
    };
    nlohmann::ordered_json j;
    j["kind"] = to_string(split.kind);
    j["seed"] = split.seed;
    j["prng"] = SplitMix64::kName;
    j["train"] = keys(split.train);
    j["validation"] = keys(split.validation);
    j["test"] = keys(split.test);
    return nlohmann::json::parse(j.dump());
}

ScenarioSplit split_from_json(const nlohmann::json& j) {
    try {
        ScenarioSplit split;
        const auto kind = parse_scenario_kind(j.at("kind").get<std::string>());
        if (!kind) throw Error(ErrorCode::ParseError, "unknown scenario kind in split file");
        split.kind = *kind;
        split.seed = j.value("seed", std::uint64_t{0});
        auto keys = [&](const char* field) {
            std::vector<DomainKey> out;
            for (const auto& s : j.at(field)) out.push_back(DomainKey::parse(s.get<std::string>()));
            std::sort(out.begin(), out.end());
            return out;
        };
        split.train = keys("train");
        split.validation = keys("validation");
        split.test = keys("test");
        return split;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, fmt::format("split file: {}", e.what()));
    }
}

}  // namespace fluxbench
