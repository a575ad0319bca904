#include "aggregation_oracle.hpp"
#include "series_gen.hpp"

#include "fluxbench/aggregate.hpp"
#include "fluxbench/error.hpp"

#include <cmath>
#include <limits>

#include <doctest.h>
#include <omp.h>

using namespace fluxbench;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Usage;
}

std::int64_t day_of(int y, unsigned m, unsigned d) { return HourTimestamp::from_civil(y, m, d, 0).day_index(); }

/// `hours` usable hours on one civil day with constant truth and prediction.
void add_day(AlignedSeries& s, int y, unsigned m, unsigned d, int hours, double truth, double prediction) {
    for (int h = 0; h < hours; ++h) {
        s.points.push_back({HourTimestamp::from_civil(y, m, d, static_cast<unsigned>(h)), truth, prediction, true});
    }
}

AggregatedPairs daily_pairs(std::vector<AggregatedPair> pairs, DomainKey domain = DomainKey::of_site(SiteId("S"))) {
    return {std::move(domain), Scale::Daily, std::move(pairs), 0};
}

/// `n` consecutive days from Jan 1 of `year`, each with the given value on both channels.
std::vector<AggregatedPair> year_of_days(int year, int n, double value) {
    std::vector<AggregatedPair> out;
    const auto first = day_of(year, 1, 1);
    for (int k = 0; k < n; ++k) out.push_back({first + k, value, value});
    return out;
}

std::vector<AggregatedPair> concat(std::vector<AggregatedPair> a, const std::vector<AggregatedPair>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_SUITE("aggregate") {

TEST_CASE("daily means need twelve usable hours") {
    AlignedSeries s{DomainKey::of_site(SiteId("S")), {}};
    add_day(s, 2019, 3, 1, 12, 2.0, 3.0);
    add_day(s, 2019, 3, 2, 11, 5.0, 5.0);
    const auto d = to_daily(s);
    REQUIRE(d.pairs.size() == 1);
    CHECK(d.pairs[0].key == day_of(2019, 3, 1));
    CHECK(d.pairs[0].truth == 2.0);
    CHECK(d.pairs[0].prediction == 3.0);
    CHECK(to_daily(AlignedSeries{}).pairs.empty());
}

TEST_CASE("invalid or missing hours do not count toward a day") {
    AlignedSeries s{DomainKey::of_site(SiteId("S")), {}};
    add_day(s, 2019, 3, 1, 13, 1.0, 1.0);
    s.points[0].valid = false;
    s.points[1].prediction = std::numeric_limits<double>::quiet_NaN();
    CHECK(to_daily(s).pairs.empty());
    CHECK(to_daily(s).missing_predictions == 1);
    CHECK(to_hourly(s).pairs.size() == 11);
}

TEST_CASE("weekly means need four days") {
    // 2019-01-07 is a Monday: ISO week 2019-W02.
    const auto mon = day_of(2019, 1, 7);
    const auto d = daily_pairs({{mon, 1, 1}, {mon + 1, 2, 2}, {mon + 2, 3, 3}, {mon + 3, 4, 4}, {mon + 7, 9, 9},
                                {mon + 8, 9, 9}, {mon + 9, 9, 9}});
    const auto w = to_weekly(d);
    REQUIRE(w.pairs.size() == 1);
    CHECK(w.pairs[0].key == 201902);
    CHECK(w.pairs[0].truth == 2.5);
    CHECK(format_key(Scale::Weekly, w.pairs[0].key) == "2019-W02");

    AggregatedPairs hourly{DomainKey::of_site(SiteId("S")), Scale::Hourly, {}, 0};
    CHECK(code_of([&] { to_weekly(hourly); }) == ErrorCode::WrongScale);
    CHECK(code_of([&] { msc(hourly); }) == ErrorCode::WrongScale);
    CHECK(code_of([&] { anomalies(hourly, hourly); }) == ErrorCode::WrongScale);
}

TEST_CASE("iso weeks straddle calendar years") {
    // 2020-12-28 (Mon) .. 2021-01-03 (Sun) is 2020-W53.
    const auto mon = day_of(2020, 12, 28);
    const auto w = to_weekly(daily_pairs({{mon + 2, 1, 1}, {mon + 3, 1, 1}, {mon + 5, 1, 1}, {mon + 6, 1, 1}}));
    REQUIRE(w.pairs.size() == 1);
    CHECK(w.pairs[0].key == 202053);
}

TEST_CASE("mean seasonal cycle averages each day of year across years") {
    const auto d = daily_pairs({{day_of(2019, 1, 1) + 99, 4, 1},
                                {day_of(2020, 1, 1) + 99, 6, 3},
                                {day_of(2019, 1, 1) + 199, 8, 8},
                                {day_of(2016, 12, 31), 1, 2},
                                {day_of(2020, 12, 31), 3, 2},
                                {day_of(2019, 12, 31), 50, 50}});
    const auto m = msc(d);
    CHECK(m.scale == Scale::Seasonal);
    REQUIRE(m.pairs.size() == 2);
    CHECK(m.pairs[0].key == 100);
    CHECK(m.pairs[0].truth == 5.0);
    CHECK(m.pairs[0].prediction == 2.0);
    // Day 366 is separate from 2019's day 365.
    CHECK(m.pairs[1].key == 366);
    CHECK(m.pairs[1].truth == 2.0);
}

TEST_CASE("anomalies subtract each channel's own cycle") {
    const auto d = daily_pairs({{day_of(2019, 1, 1) + 9, 7, 1}, {day_of(2019, 1, 1) + 10, 3, 3}});
    const AggregatedPairs m{DomainKey::of_site(SiteId("S")), Scale::Seasonal, {{10, 5, 4}}, 0};
    const auto a = anomalies(d, m);
    REQUIRE(a.pairs.size() == 1);  // day 11 has no cycle value
    CHECK(a.pairs[0].truth == 2.0);
    CHECK(a.pairs[0].prediction == -3.0);

    const auto both = daily_pairs(concat(year_of_days(2017, 30, 3.0), year_of_days(2018, 30, 3.0)));
    for (const auto& p : anomalies(both, msc(both)).pairs) {
        CHECK(p.truth == 0.0);
        CHECK(p.prediction == 0.0);
    }
}

TEST_CASE("interannual variability and site mean") {
    const auto d = daily_pairs(concat(year_of_days(2019, 200, 10.0), year_of_days(2020, 183, 14.0)));
    const auto i = iav(d, {2019, 2020});
    REQUIRE(i.pairs.size() == 2);
    CHECK(i.pairs[0].key == 2019);
    CHECK(i.pairs[0].truth == -2.0);
    CHECK(i.pairs[1].truth == 2.0);
    const auto s = site_mean(d, {2019, 2020});
    REQUIRE(s.pairs.size() == 1);
    CHECK(s.pairs[0].truth == 12.0);

    // One year in the basis: IAV is zero there, site mean is that year's mean.
    CHECK(iav(d, {2020}).pairs[0].truth == 0.0);
    CHECK(site_mean(d, {2019}).pairs[0].truth == 10.0);

    // A 150-day year is dropped.
    const auto short_year = daily_pairs(concat(year_of_days(2019, 150, 10.0), year_of_days(2020, 190, 9.0)));
    CHECK(iav(short_year, {2019, 2020}).pairs.size() == 1);
    CHECK(site_mean(short_year, {2019, 2020}).pairs[0].truth == 9.0);
    CHECK(code_of([&] { site_mean(short_year, {2019}); }) == ErrorCode::NoRetainedYears);
    CHECK(code_of([&] { iav(short_year, {2018}); }) == ErrorCode::NoRetainedYears);
}

TEST_CASE("scenario grouping") {
    AlignedSeries y2019{DomainKey::of_site_year(SiteId("A"), 2019), {}};
    AlignedSeries y2020{DomainKey::of_site_year(SiteId("A"), 2020), {}};
    for (unsigned d = 7; d <= 10; ++d) add_day(y2019, 2019, 1, d, 12, 1.0, 2.0);
    for (unsigned d = 6; d <= 9; ++d) add_day(y2020, 2020, 1, d, 12, 1.0, 2.0);
    const std::vector<AlignedSeries> temporal{y2019, y2020};
    const auto t = aggregate_for_scenario(temporal, ScenarioKind::Temporal, Scale::Weekly);
    REQUIRE(t.size() == 2);
    CHECK(t[0].domain.to_string() == "A:2019");
    CHECK(t[1].domain.to_string() == "A:2020");

    AlignedSeries whole{DomainKey::of_site(SiteId("A")), y2019.points};
    whole.points.insert(whole.points.end(), y2020.points.begin(), y2020.points.end());
    const auto s = aggregate_for_scenario(std::vector<AlignedSeries>{whole}, ScenarioKind::Spatial, Scale::Weekly);
    REQUIRE(s.size() == 1);
    CHECK(s[0].domain.to_string() == "A");
    CHECK(s[0].pairs.size() == 2);

    // Seasonal is per site even for temporal domains; days 7-9 are covered in both years.
    const auto m = aggregate_for_scenario(temporal, ScenarioKind::Temporal, Scale::Seasonal);
    REQUIRE(m.size() == 1);
    CHECK(m[0].domain.to_string() == "A");
    CHECK(m[0].pairs.size() == 3);
    CHECK(m[0].pairs[0].key == 7);
}

TEST_CASE("temporal iav basis is the site's test years") {
    AlignedSeries a{DomainKey::of_site_year(SiteId("A"), 2019), {}};
    AlignedSeries b{DomainKey::of_site_year(SiteId("A"), 2021), {}};
    for (int k = 0; k < 200; ++k) {
        const HourTimestamp base(HourTimestamp::from_civil(2019, 1, 1, 0).hours() + 24 * k);
        const HourTimestamp later(HourTimestamp::from_civil(2021, 1, 1, 0).hours() + 24 * k);
        for (int h = 0; h < 12; ++h) {
            a.points.push_back({HourTimestamp(base.hours() + h), 10.0, 11.0, true});
            b.points.push_back({HourTimestamp(later.hours() + h), 14.0, 11.0, true});
        }
    }
    const std::vector<AlignedSeries> series{a, b};
    const auto i = aggregate_for_scenario(series, ScenarioKind::Temporal, Scale::Iav);
    REQUIRE(i.size() == 1);
    CHECK(i[0].domain.to_string() == "A");
    REQUIRE(i[0].pairs.size() == 2);
    CHECK(i[0].pairs[0].key == 2019);
    CHECK(i[0].pairs[0].truth == -2.0);
    CHECK(i[0].pairs[0].prediction == 0.0);

    // Only one test year listed: the other year's points do not enter the basis.
    std::vector<AlignedSeries> mislabelled{a, b};
    mislabelled[1].domain = DomainKey::of_site_year(SiteId("A"), 2019);
    const auto j = aggregate_for_scenario(mislabelled, ScenarioKind::Temporal, Scale::SiteMean);
    REQUIRE(j.size() == 1);
    CHECK(j[0].pairs[0].truth == 10.0);
}

TEST_CASE("engine agrees with the loop oracle") {
    std::vector<AlignedSeries> sites, site_years;
    for (std::uint64_t k = 0; k < 12; ++k) {
        auto s = testgen::random_site_series("R" + std::to_string(100 + k), 1000 + k, 4000);
        for (auto& y : testgen::by_year(s)) site_years.push_back(std::move(y));
        sites.push_back(std::move(s));
    }
    for (auto scale : kAllScales) {
        CAPTURE(to_string(scale));
        CHECK(oracle::compare(aggregate_for_scenario(sites, ScenarioKind::Spatial, scale),
                              oracle::aggregate(sites, false, scale)) == "");
        CHECK(oracle::compare(aggregate_for_scenario(site_years, ScenarioKind::Temporal, scale),
                              oracle::aggregate(site_years, true, scale)) == "");
    }
}

TEST_CASE("parallel aggregation equals the serial reference") {
    std::vector<AlignedSeries> sites;
    for (std::uint64_t k = 0; k < 16; ++k) sites.push_back(testgen::random_site_series("P" + std::to_string(k), k, 3000));
    const int saved = omp_get_max_threads();
    for (auto scale : kAllScales) {
        const auto serial = aggregate_for_scenario_serial(sites, ScenarioKind::Spatial, scale);
        for (int threads : {1, 3, 8}) {
            omp_set_num_threads(threads);
            const auto parallel = aggregate_for_scenario(sites, ScenarioKind::Spatial, scale);
            REQUIRE(parallel.size() == serial.size());
            for (std::size_t i = 0; i < serial.size(); ++i) {
                CHECK(parallel[i].domain == serial[i].domain);
                CHECK(to_csv(parallel[i]) == to_csv(serial[i]));
            }
        }
    }
    omp_set_num_threads(saved);
}

TEST_CASE("raising a threshold never adds retained keys") {
    const auto s = testgen::random_site_series("T", 42, 8000);
    AggregationRules loose, strict;
    strict.min_hours_per_day = 14;
    const auto a = to_daily(s, loose);
    const auto b = to_daily(s, strict);
    CHECK(b.pairs.size() <= a.pairs.size());
    std::size_t j = 0;
    for (const auto& p : b.pairs) {
        while (j < a.pairs.size() && a.pairs[j].key < p.key) ++j;
        REQUIRE(j < a.pairs.size());
        CHECK(a.pairs[j].key == p.key);
    }
    strict.min_days_per_week = 6;
    CHECK(to_weekly(a, strict).pairs.size() <= to_weekly(a, loose).pairs.size());
}

TEST_CASE("aggregated pairs serialize with readable keys") {
    const auto d = daily_pairs({{day_of(2019, 3, 1), 1.5, 2}});
    CHECK(to_csv(d) == "key,truth,prediction\n2019-03-01,1.5,2\n");
    CHECK(parse_scale("site-mean") == Scale::SiteMean);
    CHECK(parse_scale("anom") == Scale::Anomaly);
    CHECK_FALSE(parse_scale("monthly"));
}

}  // TEST_SUITE
