#include "fluxbench/error.hpp"
#include "fluxbench/synthgen.hpp"

#include <cmath>
#include <sstream>

#include <doctest.h>

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

SynthSpec small_spec() {
    SynthSpec spec;
    spec.n_sites = 4;
    spec.years = {2019, 2019};
    spec.hours_per_day = 6;
    spec.day_stride = 5;
    spec.seed = 12;
    return spec;
}

/// Same law everywhere: no site offsets, one PFT.
SynthSpec homogeneous_spec(std::size_t n_sites) {
    SynthSpec spec = small_spec();
    spec.n_sites = n_sites;
    spec.covariates.site_spread = 0.0;
    spec.covariates.pft = Pft::GRA;
    return spec;
}

ScenarioSplit split_of(const SynthSpec& spec, std::vector<std::size_t> train, std::vector<std::size_t> test) {
    ScenarioSplit s;
    for (auto i : train) s.train.push_back(DomainKey::of_site(SiteId(synth_site_name(i, spec.n_sites))));
    for (auto i : test) s.test.push_back(DomainKey::of_site(SiteId(synth_site_name(i, spec.n_sites))));
    return s;
}

}  // namespace

TEST_SUITE("synthgen") {

TEST_CASE("site names and record layout") {
    CHECK(synth_site_name(7, 10) == "SY-007");
    CHECK(synth_site_name(12, 2000) == "SY-0012");
    const auto spec = small_spec();
    const auto ds = generate(spec);
    REQUIRE(ds.sites().size() == 4);
    // Days 1, 6, ..., 361 of 2019 at six evenly spaced hours.
    CHECK(ds.sites()[0].records.size() == 73 * 6);
    CHECK(ds.sites()[0].records[1].time.hour_of_day() == 4);
    CHECK(ds.sites()[0].records[6].time.day_of_year() == 6);
}

TEST_CASE("no dropout keeps every record valid") {
    const auto ds = generate(small_spec());
    for (const auto& s : ds.sites()) {
        for (const auto& r : s.records) {
            CHECK(r.qc);
            CHECK(r.valid());
        }
    }
}

TEST_CASE("identical seeds give identical datasets") {
    const auto a = generate(small_spec());
    const auto b = generate(small_spec());
    CHECK(a == b);
    std::ostringstream ea, eb;
    emit(a, ea);
    emit(b, eb);
    CHECK(ea.str() == eb.str());
    auto other = small_spec();
    other.seed = 13;
    CHECK_FALSE(generate(other) == a);
}

TEST_CASE("flip overrides are recorded in the truth") {
    auto spec = small_spec();
    spec.overrides.push_back({"SY-001", true, 1.0, std::nullopt, 0.0});
    SynthTruth truth;
    generate(spec, &truth);
    CHECK(truth.find(SiteId("SY-001"))->flipped);
    CHECK_FALSE(truth.find(SiteId("SY-000"))->flipped);
    const auto j = to_json(truth);
    CHECK(j["sites"][1]["conditional_shifted"] == true);
    CHECK(j["sites"][0]["conditional_shifted"] == false);
}

TEST_CASE("flipping mirrors the conditional mean around the intercept") {
    const auto spec = small_spec();
    const auto truth = ground_truth(spec);
    SiteTruth flipped = truth.sites[0];
    flipped.flipped = true;
    FeatureVector x;
    x.continuous = spec.covariates.mean;
    x.continuous[0] += 8.0;  // z_TA = 1
    x.continuous[2] += 150.0;  // z_SW = 1
    const double plain = conditional_mean(spec.conditional, spec.covariates, truth.sites[0], x);
    CHECK(plain == doctest::Approx(4.0 + 1.5 + 0.8 + 0.5 + 0.7));
    CHECK(conditional_mean(spec.conditional, spec.covariates, flipped, x) == doctest::Approx(2 * 4.0 - plain));
}

TEST_CASE("feature moments match the generator parameters") {
    auto spec = homogeneous_spec(2);
    spec.hours_per_day = 24;
    spec.day_stride = 1;
    SynthTruth truth;
    const auto ds = generate(spec, &truth);
    for (const auto& site : ds.sites()) {
        const auto& t = *truth.find(site.meta.site);
        const auto n = static_cast<double>(site.records.size());
        REQUIRE(n >= 8760);
        for (std::size_t f : {0u, 1u, 2u, 9u}) {
            double sum = 0.0;
            for (const auto& r : site.records) sum += r.features.continuous[f];
            const double mean = sum / n;
            double m2 = 0.0, m4 = 0.0;
            for (const auto& r : site.records) {
                const double d = r.features.continuous[f] - mean;
                m2 += d * d;
                m4 += d * d * d * d;
            }
            m2 /= n;
            m4 /= n;
            CAPTURE(f);
            CHECK(std::abs(mean - t.mean[f]) <= 3.0 * std::sqrt(m2 / n));
            CHECK(std::abs(m2 - t.expected_variance(f)) <= 3.0 * std::sqrt((m4 - m2 * m2) / n));
        }
    }
}

TEST_CASE("qc dropout removes the requested share") {
    auto spec = small_spec();
    spec.hours_per_day = 24;
    spec.day_stride = 1;
    spec.qc_dropout = 0.3;
    const auto ds = generate(spec);
    const auto counts = qc_counts(ds);
    double present = 0.0, valid = 0.0;
    for (const auto& c : counts) {
        present += static_cast<double>(c.present);
        valid += static_cast<double>(c.valid);
    }
    const double se = std::sqrt(0.3 * 0.7 / present);
    CHECK(std::abs(valid / present - 0.7) <= 3.0 * se);
}

TEST_CASE("ragged years respect the minimum length") {
    auto spec = small_spec();
    spec.n_sites = 20;
    spec.years = {2015, 2022};
    spec.day_stride = 60;
    spec.hours_per_day = 1;
    spec.ragged_years = true;
    spec.min_site_years = 5;
    SynthTruth truth;
    const auto ds = generate(spec, &truth);
    bool varied = false;
    for (const auto& s : truth.sites) {
        CHECK(s.last_year - s.first_year + 1 >= 5);
        CHECK(s.first_year >= 2015);
        CHECK(s.last_year <= 2022);
        varied = varied || s.first_year != 2015 || s.last_year != 2022;
        const auto years = site_years(ds, s.site);
        CHECK(*years.begin() == s.first_year);
        CHECK(*years.rbegin() == s.last_year);
    }
    CHECK(varied);
}

TEST_CASE("shift oracle") {
    auto spec = homogeneous_spec(6);
    const auto split = split_of(spec, {0, 1, 2}, {3, 4, 5});
    CHECK(shift_oracle(spec, split).label() == "none");

    auto offset = spec;
    for (std::size_t i : {3u, 4u, 5u}) offset.overrides.push_back({synth_site_name(i, 6), false, 1.0, 0, 3.0});
    CHECK(shift_oracle(offset, split).label() == "covariate");

    auto flipped = spec;
    flipped.overrides.push_back({"SY-004", true, 1.0, std::nullopt, 0.0});
    CHECK(shift_oracle(flipped, split).label() == "conditional");
    // A flipped site on both sides in equal share leaves the mixtures equal.
    flipped.overrides.push_back({"SY-001", true, 1.0, std::nullopt, 0.0});
    CHECK(shift_oracle(flipped, split).label() == "none");

    auto spread = small_spec();
    CHECK(shift_oracle(spread, split_of(spread, {0, 1}, {2, 3})).covariate_shift);
}

TEST_CASE("invalid specs are rejected") {
    auto bad = [](auto&& edit) {
        auto spec = small_spec();
        edit(spec);
        return code_of([&] { generate(spec); });
    };
    CHECK(bad([](SynthSpec& s) { s.n_sites = 1; }) == ErrorCode::InvalidSpec);
    CHECK(bad([](SynthSpec& s) { s.hours_per_day = 25; }) == ErrorCode::InvalidSpec);
    CHECK(bad([](SynthSpec& s) { s.qc_dropout = 1.5; }) == ErrorCode::InvalidSpec);
    CHECK(bad([](SynthSpec& s) { s.years = {2020, 2019}; }) == ErrorCode::InvalidSpec);
    CHECK(bad([](SynthSpec& s) { s.covariates.sd[3] = 0.0; }) == ErrorCode::InvalidSpec);
    CHECK(bad([](SynthSpec& s) { s.overrides.push_back({"XX-000"}); }) == ErrorCode::InvalidSpec);
    CHECK(bad([](SynthSpec& s) { s.conditional.terms.push_back({12, 0, 1.0}); }) == ErrorCode::InvalidSpec);
}

}  // TEST_SUITE
