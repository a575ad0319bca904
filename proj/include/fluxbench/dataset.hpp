#pragma once

#include "fluxbench/timestamp.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fluxbench {

inline constexpr std::size_t kNumContinuous = 12;
inline constexpr std::array<std::string_view, kNumContinuous> kContinuousNames = {
    "TA", "VPD", "SW_IN", "SW_IN_POT", "SW_IN_POT_daily", "dSW_IN_POT",
    "dSW_IN_POT_daily", "LST_Day", "LST_Night", "EVI", "NIRv", "NDWI_SWIR2"};
inline constexpr std::size_t kTaIndex = 0;

enum class Pft : std::uint8_t { CRO, CSH, CVM, DBF, DNF, EBF, ENF, GRA, MF, OSH, SAV, WAT, WET, WSA };
inline constexpr std::size_t kNumPft = 14;
inline constexpr std::array<std::string_view, kNumPft> kPftNames = {
    "CRO", "CSH", "CVM", "DBF", "DNF", "EBF", "ENF", "GRA", "MF", "OSH", "SAV", "WAT", "WET", "WSA"};

std::string_view to_string(Pft pft);
std::optional<Pft> parse_pft(std::string_view text);

/// Continuous covariate index by name; nullopt when unknown.
std::optional<std::size_t> continuous_index(std::string_view name);

enum class Target { Et, Gpp, Nee };
std::string_view to_string(Target target);
std::optional<Target> parse_target(std::string_view text);

class SiteId {
public:
    SiteId() = default;
    explicit SiteId(std::string value);

    const std::string& str() const { return value_; }
    auto operator<=>(const SiteId&) const = default;

private:
    std::string value_;
};

struct FeatureVector {
    std::array<double, kNumContinuous> continuous{};
    Pft pft = Pft::CRO;

    bool finite() const;
};

struct TargetTriple {
    double et = 0.0;
    double gpp = 0.0;
    double nee = 0.0;

    double get(Target t) const;
    bool finite() const;
};

/// One hourly row. The owning site is the enclosing SiteData.
struct HourlyRecord {
    HourTimestamp time;
    FeatureVector features;
    TargetTriple targets;
    bool qc = false;

    /// qc flag set and every feature and target finite.
    bool valid() const { return qc && features.finite() && targets.finite(); }
};

struct SiteMeta {
    SiteId site;
    double lat = 0.0;
    double lon = 0.0;
    Pft pft = Pft::CRO;
};

struct SiteData {
    SiteMeta meta;
    std::vector<HourlyRecord> records;  // strictly increasing time
};

struct YearRange {
    int first = 2015;
    int last = 2022;
};

/// Immutable multi-site hourly table. Sites are kept in SiteId order.
class Dataset {
public:
    Dataset() = default;
    /// Sorts sites and records; throws DuplicateKey on repeated (site, time) or repeated site,
    /// ParseError on invalid site metadata.
    explicit Dataset(std::vector<SiteData> sites, YearRange years = {});

    std::span<const SiteData> sites() const { return sites_; }
    const SiteData& site(const SiteId& id) const;  // throws UnknownSite
    const SiteData* find(const SiteId& id) const;
    std::size_t record_count() const;
    YearRange year_range() const { return years_; }

    bool operator==(const Dataset& other) const;

private:
    std::vector<SiteData> sites_;
    YearRange years_;
};

/// Canonical column names mapped to file header names. Unmapped names are used verbatim.
struct Schema {
    std::map<std::string, std::string> rename;
    char delimiter = ',';

    std::string column(std::string_view canonical) const;
};

struct RejectedRow {
    std::size_t row = 0;  // 1-based data row (header excluded)
    std::string column;
    std::string message;
};

struct IngestOptions {
    /// Strict mode throws on the first unparseable row; lenient mode skips and reports it.
    bool strict = true;
    YearRange years;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::vector<RejectedRow> rejected;
};

Dataset ingest(std::istream& in, const Schema& schema = {}, const IngestOptions& options = {},
               IngestReport* report = nullptr);
Dataset ingest(const std::filesystem::path& path, const Schema& schema = {}, const IngestOptions& options = {},
               IngestReport* report = nullptr);

/// Writes the canonical delimiter-separated format (shortest round-trip number formatting).
void emit(const Dataset& ds, std::ostream& out);

/// Keeps exactly the valid() records. Site metadata is retained even when no record survives.
Dataset qc_filter(const Dataset& ds);

struct SiteCounts {
    SiteId site;
    std::size_t present = 0;
    std::size_t valid = 0;
};
std::vector<SiteCounts> qc_counts(const Dataset& ds);

/// Years with at least one valid record for the site. Throws UnknownSite.
std::set<int> site_years(const Dataset& ds, const SiteId& site);

}  // namespace fluxbench
