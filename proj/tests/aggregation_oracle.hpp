#pragma once

// Loop-based re-implementation of the aggregation rules, written without the engine's
// calendar helpers or containers so it can serve as an independent reference.
//
//   daily     mean of usable hours, kept with >= 12 usable hours
//   weekly    ISO-8601 week mean of kept days, kept with >= 4 days
//   seasonal  per day-of-year mean of kept days across years, kept with >= 2 days (day 366 is its own key)
//   anomaly   kept day minus its day-of-year seasonal value, each channel on its own seasonal value
//   iav       year mean of kept days (>= 183 of them) minus the mean of those year means
//   site-mean mean of the kept year means
//
// A usable hour has valid truth and finite truth and prediction.

#include "fluxbench/aggregate.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

struct Pair {
    std::int64_t key;
    double truth;
    double prediction;
};

struct Group {
    std::string domain;
    std::vector<Pair> pairs;
};

struct Civil {
    int year;
    int month;
    int day;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Howard Hinnant's days_from_civil / civil_from_days.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = floor_div(y, 400);
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

inline Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = floor_div(z, 146097);
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const int d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    const int m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    return {static_cast<int>(y + (m <= 2)), m, d};
}

inline int year_of_day(std::int64_t day) { return civil_from_days(day).year; }

inline int doy_of_day(std::int64_t day) {
    return static_cast<int>(day - days_from_civil(year_of_day(day), 1, 1) + 1);
}

inline int iso_week_key_of_day(std::int64_t day) {
    const std::int64_t monday = floor_div(day + 3, 7) * 7 - 3;  // 1970-01-01 was a Thursday
    const std::int64_t thursday = monday + 3;
    const int iso_year = year_of_day(thursday);
    const int week = (doy_of_day(thursday) - 1) / 7 + 1;
    return iso_year * 100 + week;
}

inline bool usable(const fluxbench::AlignedPoint& p) {
    return p.valid && std::isfinite(p.truth) && std::isfinite(p.prediction);
}

inline std::int64_t day_of_hour(std::int64_t h) { return floor_div(h, 24); }

inline std::vector<Pair> hourly(const std::vector<fluxbench::AlignedPoint>& points) {
    std::vector<Pair> out;
    for (const auto& p : points) {
        if (usable(p)) out.push_back({p.time.hours(), p.truth, p.prediction});
    }
    return out;
}

// Keys in ascending order; a key is listed once.
inline void add_key(std::vector<std::int64_t>& keys, std::int64_t k) {
    for (auto x : keys) {
        if (x == k) return;
    }
    keys.push_back(k);
    for (std::size_t i = keys.size() - 1; i > 0 && keys[i - 1] > keys[i]; --i) std::swap(keys[i - 1], keys[i]);
}

// Points are time ordered, so each calendar day is one contiguous run.
inline std::vector<Pair> daily(const std::vector<fluxbench::AlignedPoint>& points) {
    std::vector<Pair> out;
    std::size_t i = 0;
    while (i < points.size()) {
        const std::int64_t d = day_of_hour(points[i].time.hours());
        double t = 0.0, q = 0.0;
        int n = 0;
        for (; i < points.size() && day_of_hour(points[i].time.hours()) == d; ++i) {
            if (usable(points[i])) {
                t += points[i].truth;
                q += points[i].prediction;
                ++n;
            }
        }
        if (n >= 12) out.push_back({d, t / n, q / n});
    }
    return out;
}

template <typename KeyOf>
std::vector<Pair> regroup(const std::vector<Pair>& in, KeyOf key_of, int min_count) {
    std::vector<std::int64_t> keys;
    for (const auto& p : in) add_key(keys, key_of(p.key));
    std::vector<Pair> out;
    for (auto k : keys) {
        double t = 0.0, q = 0.0;
        int n = 0;
        for (const auto& p : in) {
            if (key_of(p.key) == k) {
                t += p.truth;
                q += p.prediction;
                ++n;
            }
        }
        if (n >= min_count) out.push_back({k, t / n, q / n});
    }
    return out;
}

inline std::vector<Pair> weekly(const std::vector<Pair>& days) {
    return regroup(days, [](std::int64_t d) { return static_cast<std::int64_t>(iso_week_key_of_day(d)); }, 4);
}

inline std::vector<Pair> seasonal(const std::vector<Pair>& days) {
    return regroup(days, [](std::int64_t d) { return static_cast<std::int64_t>(doy_of_day(d)); }, 2);
}

inline std::vector<Pair> anomaly(const std::vector<Pair>& days, const std::vector<Pair>& msc) {
    std::vector<Pair> out;
    for (const auto& d : days) {
        for (const auto& m : msc) {
            if (m.key == doy_of_day(d.key)) {
                out.push_back({d.key, d.truth - m.truth, d.prediction - m.prediction});
                break;
            }
        }
    }
    return out;
}

inline std::vector<Pair> year_means(const std::vector<Pair>& days, const std::vector<int>& basis) {
    std::vector<Pair> in;
    for (const auto& d : days) {
        for (int y : basis) {
            if (year_of_day(d.key) == y) in.push_back(d);
        }
    }
    return regroup(in, [](std::int64_t d) { return static_cast<std::int64_t>(year_of_day(d)); }, 183);
}

inline std::vector<Pair> iav(const std::vector<Pair>& days, const std::vector<int>& basis) {
    const auto years = year_means(days, basis);
    if (years.empty()) return {};
    double t = 0.0, q = 0.0;
    for (const auto& y : years) {
        t += y.truth;
        q += y.prediction;
    }
    t /= static_cast<double>(years.size());
    q /= static_cast<double>(years.size());
    std::vector<Pair> out;
    for (const auto& y : years) out.push_back({y.key, y.truth - t, y.prediction - q});
    return out;
}

inline std::vector<Pair> site_mean(const std::vector<Pair>& days, const std::vector<int>& basis) {
    const auto years = year_means(days, basis);
    if (years.empty()) return {};
    double t = 0.0, q = 0.0;
    for (const auto& y : years) {
        t += y.truth;
        q += y.prediction;
    }
    const double n = static_cast<double>(years.size());
    return {{0, t / n, q / n}};
}

inline std::string domain_name(const fluxbench::AlignedSeries& s, bool with_year) {
    std::string name = s.domain.site.str();
    if (with_year && s.domain.year) name += ":" + std::to_string(*s.domain.year);
    return name;
}

/// Scenario grouping: temporal series are site-years; hourly, daily, weekly and anomaly stay
/// per site-year there, everything else is per site. IAV and site-mean use the site's
/// domain years (temporal) or every year with a point (otherwise).
inline std::vector<Group> aggregate(const std::vector<fluxbench::AlignedSeries>& series, bool temporal,
                                    fluxbench::Scale scale) {
    using fluxbench::Scale;
    std::vector<std::string> sites;
    for (const auto& s : series) {
        bool seen = false;
        for (const auto& x : sites) seen = seen || x == s.domain.site.str();
        if (!seen) sites.push_back(s.domain.site.str());
    }
    std::vector<Group> out;
    for (const auto& site : sites) {
        std::vector<const fluxbench::AlignedSeries*> members;
        for (const auto& s : series) {
            if (s.domain.site.str() == site) members.push_back(&s);
        }
        std::vector<fluxbench::AlignedPoint> all;
        std::vector<int> basis;
        for (const auto* m : members) {
            for (const auto& p : m->points) all.push_back(p);
            if (temporal && m->domain.year) {
                basis.push_back(*m->domain.year);
            } else {
                for (const auto& p : m->points) {
                    const int y = year_of_day(day_of_hour(p.time.hours()));
                    bool have = false;
                    for (int b : basis) have = have || b == y;
                    if (!have) basis.push_back(y);
                }
            }
        }
        // Time order across members.
        for (std::size_t i = 1; i < all.size(); ++i) {
            for (std::size_t j = i; j > 0 && all[j - 1].time > all[j].time; --j) std::swap(all[j - 1], all[j]);
        }
        const bool split_members = temporal && (scale == Scale::Hourly || scale == Scale::Daily ||
                                                scale == Scale::Weekly || scale == Scale::Anomaly);
        if (split_members) {
            const auto site_msc = seasonal(daily(all));
            for (const auto* m : members) {
                Group g{domain_name(*m, true), {}};
                switch (scale) {
                    case Scale::Hourly: g.pairs = hourly(m->points); break;
                    case Scale::Daily: g.pairs = daily(m->points); break;
                    case Scale::Weekly: g.pairs = weekly(daily(m->points)); break;
                    default: g.pairs = anomaly(daily(m->points), site_msc); break;
                }
                if (!g.pairs.empty()) out.push_back(std::move(g));
            }
            continue;
        }
        Group g{site, {}};
        const auto days = daily(all);
        switch (scale) {
            case Scale::Hourly: g.pairs = hourly(all); break;
            case Scale::Daily: g.pairs = days; break;
            case Scale::Weekly: g.pairs = weekly(days); break;
            case Scale::Seasonal: g.pairs = seasonal(days); break;
            case Scale::Anomaly: g.pairs = anomaly(days, seasonal(days)); break;
            case Scale::Iav: g.pairs = iav(days, basis); break;
            case Scale::SiteMean: g.pairs = site_mean(days, basis); break;
        }
        if (!g.pairs.empty()) out.push_back(std::move(g));
    }
    return out;
}

/// Empty when engine and oracle agree on domains and keys exactly and on values within tol;
/// otherwise a description of the first difference.
inline std::string compare(const std::vector<fluxbench::AggregatedPairs>& engine, const std::vector<Group>& expected,
                           double tol = 1e-12) {
    std::vector<Group> sorted = expected;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        for (std::size_t j = i; j > 0 && sorted[j - 1].domain > sorted[j].domain; --j) std::swap(sorted[j - 1], sorted[j]);
    }
    std::vector<std::string> names;
    for (const auto& e : engine) names.push_back(e.domain.to_string());
    if (names.size() != sorted.size()) {
        return "group count " + std::to_string(names.size()) + " vs " + std::to_string(sorted.size());
    }
    for (std::size_t g = 0; g < sorted.size(); ++g) {
        // Engine order is by (site, year); string order agrees for equal-width years.
        const fluxbench::AggregatedPairs* match = nullptr;
        for (const auto& e : engine) {
            if (e.domain.to_string() == sorted[g].domain) match = &e;
        }
        if (!match) return "missing group " + sorted[g].domain;
        const auto& a = match->pairs;
        const auto& b = sorted[g].pairs;
        if (a.size() != b.size()) {
            return sorted[g].domain + ": " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " keys";
        }
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k].key != b[k].key) return sorted[g].domain + ": key " + std::to_string(a[k].key);
            if (!(std::abs(a[k].truth - b[k].truth) <= tol) || !(std::abs(a[k].prediction - b[k].prediction) <= tol)) {
                return sorted[g].domain + ": value at key " + std::to_string(a[k].key);
            }
        }
    }
    return {};
}

}  // namespace oracle
