#include "fluxbench/dataset.hpp"
#include "fluxbench/error.hpp"
#include "fluxbench/rng.hpp"
#include "support.hpp"

#include <cmath>
#include <sstream>

#include <doctest.h>

using namespace fluxbench;
using testutil::record;
using testutil::site;

namespace {

const char* kHeader =
    "site,time,qc_mask,TA,VPD,SW_IN,SW_IN_POT,SW_IN_POT_daily,dSW_IN_POT,dSW_IN_POT_daily,LST_Day,LST_Night,"
    "EVI,NIRv,NDWI_SWIR2,PFT,ET,GPP,NEE\n";

std::string row(const std::string& site, const std::string& time, int qc = 1, const std::string& ta = "10") {
    return site + "," + time + "," + std::to_string(qc) + "," + ta + ",1,2,3,4,5,6,7,8,9,10,11,GRA,0.1,5,-3\n";
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Usage;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("ingest reads a well-formed file") {
    std::istringstream in(std::string(kHeader) + row("AU-Cum", "2019-01-01T00:00:00") +
                          row("AU-Cum", "2019-01-01T02:00:00") + row("AU-Cum", "2019-01-01 01:00"));
    const auto ds = ingest(in);
    REQUIRE(ds.sites().size() == 1);
    CHECK(ds.record_count() == 3);
    const auto& s = ds.site(SiteId("AU-Cum"));
    CHECK(s.records[0].time < s.records[1].time);
    CHECK(s.records[1].time.hour_of_day() == 1);
    CHECK(s.meta.pft == Pft::GRA);
    CHECK(s.records[0].features.continuous[1] == 1.0);
    CHECK(s.records[0].targets.nee == -3.0);
}

TEST_CASE("ingest rejects a missing mandatory column") {
    std::string header = kHeader;
    header.replace(header.find(",VPD"), 4, "");
    std::istringstream in(header);
    try {
        ingest(in);
        FAIL("expected MissingColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingColumn);
        CHECK(std::string(e.what()).find("VPD") != std::string::npos);
    }
}

TEST_CASE("ingest rejects duplicate keys") {
    std::istringstream in(std::string(kHeader) + row("A", "2019-01-01T00:00") + row("A", "2019-01-01T00:00"));
    CHECK(code_of([&] { ingest(in); }) == ErrorCode::DuplicateKey);
}

TEST_CASE("ingest rejects sub-hourly and malformed values") {
    std::istringstream sub(std::string(kHeader) + row("A", "2019-01-01T00:30:00"));
    CHECK(code_of([&] { ingest(sub); }) == ErrorCode::ParseError);
    std::istringstream bad(std::string(kHeader) + row("A", "2019-01-01T00:00", 1, "warm"));
    CHECK(code_of([&] { ingest(bad); }) == ErrorCode::ParseError);
    std::istringstream qc(std::string(kHeader) + row("A", "2019-01-01T00:00", 2));
    CHECK(code_of([&] { ingest(qc); }) == ErrorCode::ParseError);
}

TEST_CASE("lenient ingest reports rejected rows and keeps the rest") {
    std::istringstream in(std::string(kHeader) + row("A", "2019-01-01T00:00") + row("A", "nope") +
                          row("A", "2019-01-01T01:00"));
    IngestReport report;
    const auto ds = ingest(in, {}, {.strict = false}, &report);
    CHECK(ds.record_count() == 2);
    REQUIRE(report.rejected.size() == 1);
    CHECK(report.rejected[0].row == 2);
    CHECK(report.rejected[0].column == "time");
    CHECK(report.rows_read == 3);
}

TEST_CASE("missing tokens become NaN and fail QC") {
    std::istringstream in(std::string(kHeader) + row("A", "2019-01-01T00:00", 1, "NA") +
                          row("A", "2019-01-01T01:00", 1, ""));
    const auto ds = ingest(in);
    CHECK(ds.record_count() == 2);
    CHECK(std::isnan(ds.sites()[0].records[0].features.continuous[0]));
    CHECK(qc_filter(ds).record_count() == 0);
}

TEST_CASE("schema renames columns") {
    std::string header = kHeader;
    header.replace(0, 4, "SITE_ID");
    std::istringstream in(header + row("A", "2019-01-01T00:00"));
    Schema schema;
    schema.rename["site"] = "SITE_ID";
    CHECK(ingest(in, schema).record_count() == 1);
}

TEST_CASE("site metadata is validated") {
    std::vector<SiteData> sites{site("A", {record(2019, 1, 1, 0)})};
    sites[0].meta.lat = 95.0;
    CHECK(code_of([&] { Dataset ds(sites); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { SiteId empty(""); }) == ErrorCode::ParseError);
}

TEST_CASE("qc_filter keeps valid records only") {
    std::vector<HourlyRecord> records;
    for (unsigned h = 0; h < 10; ++h) records.push_back(record(2019, 1, 1, h, 10.0, h >= 4));
    Dataset ds({site("A", records)});
    CHECK(qc_filter(ds).record_count() == 6);

    records.clear();
    for (unsigned h = 0; h < 3; ++h) records.push_back(record(2019, 1, 1, h));
    records[1].features.continuous[5] = std::nan("");
    Dataset with_nan({site("A", records)});
    const auto filtered = qc_filter(with_nan);
    CHECK(filtered.record_count() == 2);

    CHECK(qc_filter(Dataset{}).record_count() == 0);
}

TEST_CASE("qc_filter is idempotent and leaves only complete rows") {
    SplitMix64 rng(5);
    std::vector<HourlyRecord> records;
    for (unsigned h = 0; h < 200; ++h) {
        auto r = record(2019, 1 + h / 24 / 28, 1 + (h / 24) % 28, h % 24, rng.normal(), rng.uniform() < 0.8);
        if (rng.uniform() < 0.1) r.targets.gpp = std::nan("");
        if (rng.uniform() < 0.1) r.features.continuous[rng.bounded(kNumContinuous)] = std::nan("");
        records.push_back(r);
    }
    Dataset ds({site("A", records)});
    const auto once = qc_filter(ds);
    CHECK(qc_filter(once) == once);
    for (const auto& r : once.sites()[0].records) {
        CHECK(r.qc);
        CHECK(r.features.finite());
        CHECK(r.targets.finite());
    }
}

TEST_CASE("qc_counts reports present and valid records") {
    Dataset ds({site("A", {record(2019, 1, 1, 0), record(2019, 1, 1, 1, 10.0, false)})});
    const auto counts = qc_counts(ds);
    REQUIRE(counts.size() == 1);
    CHECK(counts[0].present == 2);
    CHECK(counts[0].valid == 1);
}

TEST_CASE("site_years lists years with valid data") {
    Dataset ds({site("A", {record(2015, 3, 1, 0), record(2016, 3, 1, 0, 10.0, false), record(2017, 3, 1, 0)})});
    CHECK(site_years(ds, SiteId("A")) == std::set<int>{2015, 2017});
    CHECK(code_of([&] { site_years(ds, SiteId("B")); }) == ErrorCode::UnknownSite);
}

TEST_CASE("emit then ingest is the identity") {
    SplitMix64 rng(11);
    std::vector<SiteData> sites;
    for (int s = 0; s < 3; ++s) {
        std::vector<HourlyRecord> records;
        for (unsigned h = 0; h < 50; ++h) {
            auto r = record(2016 + s, 2, 29 - s, h % 24, rng.normal() * 1e3, rng.uniform() < 0.9, rng.normal());
            r.time = HourTimestamp(r.time.hours() + 24 * (h / 24));
            for (auto& v : r.features.continuous) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
            r.targets = {rng.normal(), rng.normal() * 1e-7, rng.normal() * 1e9};
            if (h == 7) r.targets.et = std::nan("");
            r.features.pft = static_cast<Pft>(s);  // the file carries PFT per row; sites read it from their first row
            records.push_back(r);
        }
        sites.push_back(site("S" + std::to_string(s), records, static_cast<Pft>(s)));
        sites.back().meta.lat = rng.uniform(-90, 90);
        sites.back().meta.lon = rng.uniform(-180, 180);
    }
    Dataset ds(sites);
    std::stringstream buf;
    emit(ds, buf);
    const auto back = ingest(buf);
    CHECK(back == ds);
}

TEST_CASE("timestamps") {
    const auto t = HourTimestamp::parse("2020-12-31T23:00:00Z");
    CHECK(t.year() == 2020);
    CHECK(t.day_of_year() == 366);
    CHECK(t.to_string() == "2020-12-31T23:00:00");
    CHECK(HourTimestamp::parse("2019-03-01 05").hour_of_day() == 5);
    CHECK(code_of([] { HourTimestamp::parse("2019-03-01T05:00:01"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { HourTimestamp::parse("2019-02-30T05:00"); }) == ErrorCode::ParseError);
    CHECK(calendar::iso_week_key(HourTimestamp::parse("2021-01-03T00").day_index()) == 202053);
    CHECK(calendar::iso_week_key(HourTimestamp::parse("2019-12-30T00").day_index()) == 202001);
}

}  // TEST_SUITE
