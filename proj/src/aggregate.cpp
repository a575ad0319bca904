#include "fluxbench/aggregate.hpp"

#include "fluxbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace fluxbench {

std::string_view to_string(Scale scale) {
    switch (scale) {
        case Scale::Hourly: return "hourly";
        case Scale::Daily: return "daily";
        case Scale::Weekly: return "weekly";
        case Scale::Seasonal: return "seasonal";
        case Scale::Anomaly: return "anom";
        case Scale::Iav: return "iav";
        case Scale::SiteMean: return "site-mean";
    }
    return "?";
}

std::optional<Scale> parse_scale(std::string_view text) {
    for (auto s : kAllScales) {
        if (to_string(s) == text) return s;
    }
    if (text == "anomaly") return Scale::Anomaly;
    if (text == "site_mean") return Scale::SiteMean;
    return std::nullopt;
}

std::string format_key(Scale scale, std::int64_t key) {
    switch (scale) {
        case Scale::Hourly: return HourTimestamp{key}.to_string();
        case Scale::Daily:
        case Scale::Anomaly: return calendar::format_date(key);
        case Scale::Weekly: return calendar::format_iso_week(static_cast<int>(key));
        case Scale::Seasonal:
        case Scale::Iav: return fmt::format("{}", key);
        case Scale::SiteMean: return "site";
    }
    return fmt::format("{}", key);
}

namespace {

bool usable(const AlignedPoint& p) { return p.valid && std::isfinite(p.truth) && std::isfinite(p.prediction); }

struct Acc {
    double truth = 0.0;
    double prediction = 0.0;
    std::size_t n = 0;

    void add(double t, double p) {
        truth += t;
        prediction += p;
        ++n;
    }
    AggregatedPair mean(std::int64_t key) const {
        return {key, truth / static_cast<double>(n), prediction / static_cast<double>(n)};
    }
};

void require_scale(const AggregatedPairs& p, Scale s) {
    if (p.scale != s) {
        throw Error(ErrorCode::WrongScale, fmt::format("expected {} input, got {}", to_string(s), to_string(p.scale)));
    }
}

std::size_t missing(const AlignedSeries& s) {
    return static_cast<std::size_t>(std::count_if(s.points.begin(), s.points.end(), [](const AlignedPoint& p) {
        return p.valid && std::isfinite(p.truth) && !std::isfinite(p.prediction);
    }));
}

}  // namespace

AggregatedPairs to_hourly(const AlignedSeries& s) {
    AggregatedPairs out{s.domain, Scale::Hourly, {}, missing(s)};
    for (const auto& p : s.points) {
        if (usable(p)) out.pairs.push_back({p.time.hours(), p.truth, p.prediction});
    }
    return out;
}

AggregatedPairs to_daily(const AlignedSeries& s, const AggregationRules& rules) {
    AggregatedPairs out{s.domain, Scale::Daily, {}, missing(s)};
    std::map<std::int64_t, Acc> days;
    for (const auto& p : s.points) {
        if (usable(p)) days[p.time.day_index()].add(p.truth, p.prediction);
    }
    for (const auto& [day, acc] : days) {
        if (acc.n >= rules.min_hours_per_day) out.pairs.push_back(acc.mean(day));
    }
    return out;
}

AggregatedPairs to_weekly(const AggregatedPairs& daily, const AggregationRules& rules) {
    require_scale(daily, Scale::Daily);
    std::map<std::int64_t, Acc> weeks;
    for (const auto& d : daily.pairs) weeks[calendar::iso_week_key(d.key)].add(d.truth, d.prediction);
    AggregatedPairs out{daily.domain, Scale::Weekly, {}, daily.missing_predictions};
    for (const auto& [week, acc] : weeks) {
        if (acc.n >= rules.min_days_per_week) out.pairs.push_back(acc.mean(week));
    }
    return out;
}

AggregatedPairs msc(const AggregatedPairs& daily, const AggregationRules& rules) {
    require_scale(daily, Scale::Daily);
    std::map<std::int64_t, Acc> doys;
    for (const auto& d : daily.pairs) doys[calendar::day_of_year(d.key)].add(d.truth, d.prediction);
    AggregatedPairs out{DomainKey::of_site(daily.domain.site), Scale::Seasonal, {}, daily.missing_predictions};
    for (const auto& [doy, acc] : doys) {
        if (acc.n >= rules.min_years_per_doy) out.pairs.push_back(acc.mean(doy));
    }
    return out;
}

AggregatedPairs anomalies(const AggregatedPairs& daily, const AggregatedPairs& seasonal) {
    require_scale(daily, Scale::Daily);
    require_scale(seasonal, Scale::Seasonal);
    std::map<std::int64_t, const AggregatedPair*> by_doy;
    for (const auto& m : seasonal.pairs) by_doy[m.key] = &m;
    AggregatedPairs out{daily.domain, Scale::Anomaly, {}, daily.missing_predictions};
    for (const auto& d : daily.pairs) {
        auto it = by_doy.find(calendar::day_of_year(d.key));
        if (it == by_doy.end()) continue;
        out.pairs.push_back({d.key, d.truth - it->second->truth, d.prediction - it->second->prediction});
    }
    return out;
}

std::vector<YearlyMean> yearly_means(const AggregatedPairs& daily, const std::set<int>& basis,
                                     const AggregationRules& rules) {
    require_scale(daily, Scale::Daily);
    std::map<int, Acc> years;
    for (const auto& d : daily.pairs) {
        const int y = calendar::year_of(d.key);
        if (basis.contains(y)) years[y].add(d.truth, d.prediction);
    }
    std::vector<YearlyMean> out;
    for (const auto& [y, acc] : years) {
        if (acc.n >= rules.min_days_per_year) {
            const auto m = acc.mean(y);
            out.push_back({y, m.truth, m.prediction});
        }
    }
    return out;
}

AggregatedPairs iav(const AggregatedPairs& daily, const std::set<int>& basis, const AggregationRules& rules) {
    const auto years = yearly_means(daily, basis, rules);
    if (years.empty()) throw Error(ErrorCode::NoRetainedYears, daily.domain.to_string());
    Acc site;
    for (const auto& y : years) site.add(y.truth, y.prediction);
    const auto level = site.mean(0);
    AggregatedPairs out{DomainKey::of_site(daily.domain.site), Scale::Iav, {}, daily.missing_predictions};
    for (const auto& y : years) out.pairs.push_back({y.year, y.truth - level.truth, y.prediction - level.prediction});
    return out;
}

AggregatedPairs site_mean(const AggregatedPairs& daily, const std::set<int>& basis, const AggregationRules& rules) {
    const auto years = yearly_means(daily, basis, rules);
    if (years.empty()) throw Error(ErrorCode::NoRetainedYears, daily.domain.to_string());
    Acc site;
    for (const auto& y : years) site.add(y.truth, y.prediction);
    return {DomainKey::of_site(daily.domain.site), Scale::SiteMean, {site.mean(0)}, daily.missing_predictions};
}

namespace {

/// Work item: one output group, made of one or more input series.
struct Group {
    DomainKey domain;
    std::vector<const AlignedSeries*> members;  // per-site groups may hold several site-years
    std::set<int> basis;
};

AlignedSeries merge(const Group& g) {
    AlignedSeries out{g.domain, {}};
    for (const auto* s : g.members) out.points.insert(out.points.end(), s->points.begin(), s->points.end());
    std::stable_sort(out.points.begin(), out.points.end(),
                     [](const AlignedPoint& a, const AlignedPoint& b) { return a.time < b.time; });
    return out;
}

std::set<int> years_present(const AlignedSeries& s) {
    std::set<int> out;
    for (const auto& p : s.points) out.insert(p.time.year());
    return out;
}

bool per_site_scale(Scale scale) { return scale == Scale::Seasonal || scale == Scale::Iav || scale == Scale::SiteMean; }

std::vector<Group> make_groups(std::span<const AlignedSeries> series, ScenarioKind kind, Scale scale) {
    std::map<DomainKey, Group> groups;
    for (const auto& s : series) {
        DomainKey key = s.domain;
        if (kind != ScenarioKind::Temporal || per_site_scale(scale) || scale == Scale::Anomaly) {
            key = DomainKey::of_site(s.domain.site);
        }
        auto& g = groups[key];
        g.domain = key;
        g.members.push_back(&s);
        if (kind == ScenarioKind::Temporal && s.domain.year) {
            g.basis.insert(*s.domain.year);
        } else {
            const auto y = years_present(s);
            g.basis.insert(y.begin(), y.end());
        }
    }
    std::vector<Group> out;
    for (auto& [k, g] : groups) out.push_back(std::move(g));
    return out;
}

/// Results for one group (anomalies may fan out into several site-year domains).
std::vector<AggregatedPairs> aggregate_group(const Group& g, ScenarioKind kind, Scale scale,
                                             const AggregationRules& rules) {
    const auto merged = merge(g);
    std::vector<AggregatedPairs> out;
    switch (scale) {
        case Scale::Hourly: out.push_back(to_hourly(merged)); break;
        case Scale::Daily: out.push_back(to_daily(merged, rules)); break;
        case Scale::Weekly: out.push_back(to_weekly(to_daily(merged, rules), rules)); break;
        case Scale::Seasonal: out.push_back(msc(to_daily(merged, rules), rules)); break;
        case Scale::Anomaly: {
            const auto seasonal = msc(to_daily(merged, rules), rules);
            if (kind == ScenarioKind::Temporal) {
                for (const auto* member : g.members) {
                    out.push_back(anomalies(to_daily(*member, rules), seasonal));
                }
            } else {
                out.push_back(anomalies(to_daily(merged, rules), seasonal));
            }
            break;
        }
        case Scale::Iav:
        case Scale::SiteMean: {
            try {
                const auto daily = to_daily(merged, rules);
                out.push_back(scale == Scale::Iav ? iav(daily, g.basis, rules) : site_mean(daily, g.basis, rules));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoRetainedYears) throw;
            }
            break;
        }
    }
    std::erase_if(out, [](const AggregatedPairs& p) { return p.pairs.empty(); });
    return out;
}

std::vector<AggregatedPairs> flatten(std::vector<std::vector<AggregatedPairs>> parts) {
    std::vector<AggregatedPairs> out;
    for (auto& p : parts) {
        for (auto& a : p) out.push_back(std::move(a));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const AggregatedPairs& a, const AggregatedPairs& b) { return a.domain < b.domain; });
    return out;
}

}  // namespace

std::vector<AggregatedPairs> aggregate_for_scenario_serial(std::span<const AlignedSeries> series, ScenarioKind kind,
                                                           Scale scale, const AggregationRules& rules) {
    const auto groups = make_groups(series, kind, scale);
    std::vector<std::vector<AggregatedPairs>> parts;
    for (const auto& g : groups) parts.push_back(aggregate_group(g, kind, scale, rules));
    return flatten(std::move(parts));
}

std::vector<AggregatedPairs> aggregate_for_scenario(std::span<const AlignedSeries> series, ScenarioKind kind,
                                                    Scale scale, const AggregationRules& rules) {
    const auto groups = make_groups(series, kind, scale);
    std::vector<std::vector<AggregatedPairs>> parts(groups.size());
    const auto n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        parts[static_cast<std::size_t>(i)] = aggregate_group(groups[static_cast<std::size_t>(i)], kind, scale, rules);
    }
    return flatten(std::move(parts));
}

std::string to_csv(const AggregatedPairs& pairs) {
    std::string out = "key,truth,prediction\n";
    for (const auto& p : pairs.pairs) {
        out += fmt::format("{},{},{}\n", format_key(pairs.scale, p.key), p.truth, p.prediction);
    }
    return out;
}

}  // namespace fluxbench
