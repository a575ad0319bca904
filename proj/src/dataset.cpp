#include "fluxbench/dataset.hpp"

#include "fluxbench/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace fluxbench {

std::string_view to_string(Pft pft) { return kPftNames[static_cast<std::size_t>(pft)]; }

std::optional<Pft> parse_pft(std::string_view text) {
    for (std::size_t i = 0; i < kNumPft; ++i) {
        if (kPftNames[i] == text) return static_cast<Pft>(i);
    }
    return std::nullopt;
}

std::optional<std::size_t> continuous_index(std::string_view name) {
    for (std::size_t i = 0; i < kNumContinuous; ++i) {
        if (kContinuousNames[i] == name) return i;
    }
    return std::nullopt;
}

std::string_view to_string(Target target) {
    switch (target) {
        case Target::Et: return "et";
        case Target::Gpp: return "gpp";
        case Target::Nee: return "nee";
    }
    return "?";
}

std::optional<Target> parse_target(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "et") return Target::Et;
    if (lower == "gpp") return Target::Gpp;
    if (lower == "nee") return Target::Nee;
    return std::nullopt;
}

SiteId::SiteId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw Error(ErrorCode::ParseError, "empty site id");
}

bool FeatureVector::finite() const {
    return std::all_of(continuous.begin(), continuous.end(), [](double v) { return std::isfinite(v); });
}

double TargetTriple::get(Target t) const {
    switch (t) {
        case Target::Et: return et;
        case Target::Gpp: return gpp;
        case Target::Nee: return nee;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

bool TargetTriple::finite() const { return std::isfinite(et) && std::isfinite(gpp) && std::isfinite(nee); }

Dataset::Dataset(std::vector<SiteData> sites, YearRange years) : sites_(std::move(sites)), years_(years) {
    std::sort(sites_.begin(), sites_.end(),
              [](const SiteData& a, const SiteData& b) { return a.meta.site < b.meta.site; });
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        auto& s = sites_[i];
        if (i > 0 && sites_[i - 1].meta.site == s.meta.site) {
            throw Error(ErrorCode::DuplicateKey, fmt::format("site {} listed twice", s.meta.site.str()));
        }
        if (!(s.meta.lat >= -90.0 && s.meta.lat <= 90.0) || !(s.meta.lon >= -180.0 && s.meta.lon <= 180.0)) {
            throw Error(ErrorCode::ParseError, fmt::format("site {} has out-of-range coordinates", s.meta.site.str()));
        }
        std::stable_sort(s.records.begin(), s.records.end(),
                         [](const HourlyRecord& a, const HourlyRecord& b) { return a.time < b.time; });
        for (std::size_t r = 1; r < s.records.size(); ++r) {
            if (s.records[r].time == s.records[r - 1].time) {
                throw Error(ErrorCode::DuplicateKey,
                            fmt::format("({}, {})", s.meta.site.str(), s.records[r].time.to_string()));
            }
        }
    }
}

const SiteData* Dataset::find(const SiteId& id) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), id,
                               [](const SiteData& s, const SiteId& key) { return s.meta.site < key; });
    if (it == sites_.end() || it->meta.site != id) return nullptr;
    return &*it;
}

const SiteData& Dataset::site(const SiteId& id) const {
    if (const auto* s = find(id)) return *s;
    throw Error(ErrorCode::UnknownSite, id.str());
}

std::size_t Dataset::record_count() const {
    std::size_t n = 0;
    for (const auto& s : sites_) n += s.records.size();
    return n;
}

namespace {

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same_record(const HourlyRecord& a, const HourlyRecord& b) {
    if (a.time != b.time || a.qc != b.qc || a.features.pft != b.features.pft) return false;
    for (std::size_t i = 0; i < kNumContinuous; ++i) {
        if (!same_double(a.features.continuous[i], b.features.continuous[i])) return false;
    }
    return same_double(a.targets.et, b.targets.et) && same_double(a.targets.gpp, b.targets.gpp) &&
           same_double(a.targets.nee, b.targets.nee);
}

}  // namespace

bool Dataset::operator==(const Dataset& other) const {
    if (sites_.size() != other.sites_.size()) return false;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        const auto& a = sites_[i];
        const auto& b = other.sites_[i];
        if (a.meta.site != b.meta.site || a.meta.pft != b.meta.pft || !same_double(a.meta.lat, b.meta.lat) ||
            !same_double(a.meta.lon, b.meta.lon) || a.records.size() != b.records.size()) {
            return false;
        }
        for (std::size_t r = 0; r < a.records.size(); ++r) {
            if (!same_record(a.records[r], b.records[r])) return false;
        }
    }
    return true;
}

std::string Schema::column(std::string_view canonical) const {
    auto it = rename.find(std::string(canonical));
    return it == rename.end() ? std::string(canonical) : it->second;
}

namespace {

struct ColumnLayout {
    std::size_t site, time, qc, pft, et, gpp, nee;
    std::array<std::size_t, kNumContinuous> features;
    std::optional<std::size_t> lat, lon;
};

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '"')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '"' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        out.push_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool is_missing_token(std::string_view s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "NAN" || s == "-nan";
}

/// Parses a real; missing tokens become NaN. Returns false on garbage.
bool parse_real(std::string_view s, double& out) {
    if (is_missing_token(s)) {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

ColumnLayout resolve_columns(const std::vector<std::string_view>& header, const Schema& schema) {
    auto find = [&](std::string_view canonical) -> std::optional<std::size_t> {
        const auto name = schema.column(canonical);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    auto require = [&](std::string_view canonical) {
        if (auto idx = find(canonical)) return *idx;
        throw Error(ErrorCode::MissingColumn, schema.column(canonical));
    };
    ColumnLayout layout{};
    layout.site = require("site");
    layout.time = require("time");
    layout.qc = require("qc_mask");
    for (std::size_t i = 0; i < kNumContinuous; ++i) layout.features[i] = require(kContinuousNames[i]);
    layout.pft = require("PFT");
    layout.et = require("ET");
    layout.gpp = require("GPP");
    layout.nee = require("NEE");
    layout.lat = find("tower_lat");
    layout.lon = find("tower_lon");
    return layout;
}

}  // namespace

Dataset ingest(std::istream& in, const Schema& schema, const IngestOptions& options, IngestReport* report) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "site (empty file)");
    const std::string header_line = line;
    const auto layout = resolve_columns(split(header_line, schema.delimiter), schema);

    std::map<SiteId, SiteData> by_site;
    IngestReport local;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto fields = split(line, schema.delimiter);
        std::string bad_column;
        std::string message;
        auto reject = [&](std::string column, std::string msg) {
            bad_column = std::move(column);
            message = std::move(msg);
        };
        auto field = [&](std::size_t idx) -> std::string_view { return idx < fields.size() ? fields[idx] : ""; };

        HourlyRecord rec;
        double lat = 0.0, lon = 0.0;
        std::optional<Pft> pft;
        std::string site_text(field(layout.site));
        if (site_text.empty()) reject("site", "empty site id");
        if (bad_column.empty()) {
            try {
                rec.time = HourTimestamp::parse(field(layout.time));
            } catch (const Error& e) {
                reject("time", e.what());
            }
        }
        if (bad_column.empty()) {
            double qc = 0.0;
            if (!parse_real(field(layout.qc), qc) || !(qc == 0.0 || qc == 1.0)) {
                reject("qc_mask", fmt::format("'{}' is not 0 or 1", field(layout.qc)));
            }
            rec.qc = qc == 1.0;
        }
        for (std::size_t i = 0; i < kNumContinuous && bad_column.empty(); ++i) {
            if (!parse_real(field(layout.features[i]), rec.features.continuous[i])) {
                reject(std::string(kContinuousNames[i]), fmt::format("'{}' is not a number", field(layout.features[i])));
            }
        }
        if (bad_column.empty()) {
            pft = parse_pft(field(layout.pft));
            if (!pft) reject("PFT", fmt::format("unknown PFT class '{}'", field(layout.pft)));
            else rec.features.pft = *pft;
        }
        const std::array<std::pair<std::size_t, double*>, 3> targets = {
            std::pair{layout.et, &rec.targets.et}, {layout.gpp, &rec.targets.gpp}, {layout.nee, &rec.targets.nee}};
        const std::array<std::string_view, 3> target_names = {"ET", "GPP", "NEE"};
        for (std::size_t t = 0; t < 3 && bad_column.empty(); ++t) {
            if (!parse_real(field(targets[t].first), *targets[t].second)) {
                reject(std::string(target_names[t]), fmt::format("'{}' is not a number", field(targets[t].first)));
            }
        }
        if (bad_column.empty() && layout.lat && !parse_real(field(*layout.lat), lat)) reject("tower_lat", "not a number");
        if (bad_column.empty() && layout.lon && !parse_real(field(*layout.lon), lon)) reject("tower_lon", "not a number");

        if (!bad_column.empty()) {
            if (options.strict) {
                throw Error(ErrorCode::ParseError, fmt::format("row {}, column {}: {}", row, bad_column, message));
            }
            local.rejected.push_back({row, bad_column, message});
            continue;
        }
        SiteId id(std::move(site_text));
        auto [it, inserted] = by_site.try_emplace(id);
        if (inserted) {
            it->second.meta.site = id;
            it->second.meta.pft = *pft;
            it->second.meta.lat = std::isfinite(lat) ? lat : 0.0;
            it->second.meta.lon = std::isfinite(lon) ? lon : 0.0;
        }
        it->second.records.push_back(rec);
    }
    local.rows_read = row;
    std::vector<SiteData> sites;
    sites.reserve(by_site.size());
    for (auto& [id, data] : by_site) sites.push_back(std::move(data));
    Dataset ds(std::move(sites), options.years);
    if (report) *report = std::move(local);
    return ds;
}

Dataset ingest(const std::filesystem::path& path, const Schema& schema, const IngestOptions& options,
               IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
    return ingest(in, schema, options, report);
}

namespace {
std::string fmt_real(double v) { return std::isnan(v) ? std::string("NaN") : fmt::format("{}", v); }
}  // namespace

void emit(const Dataset& ds, std::ostream& out) {
    out << "site,time,qc_mask";
    for (auto name : kContinuousNames) out << ',' << name;
    out << ",PFT,ET,GPP,NEE,tower_lat,tower_lon\n";
    for (const auto& s : ds.sites()) {
        const auto lat = fmt_real(s.meta.lat);
        const auto lon = fmt_real(s.meta.lon);
        for (const auto& r : s.records) {
            out << s.meta.site.str() << ',' << r.time.to_string() << ',' << (r.qc ? 1 : 0);
            for (double v : r.features.continuous) out << ',' << fmt_real(v);
            out << ',' << to_string(r.features.pft) << ',' << fmt_real(r.targets.et) << ','
                << fmt_real(r.targets.gpp) << ',' << fmt_real(r.targets.nee) << ',' << lat << ',' << lon << '\n';
        }
    }
}

Dataset qc_filter(const Dataset& ds) {
    std::vector<SiteData> sites;
    sites.reserve(ds.sites().size());
    for (const auto& s : ds.sites()) {
        SiteData kept{s.meta, {}};
        std::copy_if(s.records.begin(), s.records.end(), std::back_inserter(kept.records),
                     [](const HourlyRecord& r) { return r.valid(); });
        sites.push_back(std::move(kept));
    }
    return Dataset(std::move(sites), ds.year_range());
}

std::vector<SiteCounts> qc_counts(const Dataset& ds) {
    std::vector<SiteCounts> out;
    for (const auto& s : ds.sites()) {
        SiteCounts c{s.meta.site, s.records.size(), 0};
        c.valid = static_cast<std::size_t>(
            std::count_if(s.records.begin(), s.records.end(), [](const HourlyRecord& r) { return r.valid(); }));
        out.push_back(std::move(c));
    }
    return out;
}

std::set<int> site_years(const Dataset& ds, const SiteId& site) {
    std::set<int> years;
    for (const auto& r : ds.site(site).records) {
        if (r.valid()) years.insert(r.time.year());
    }
    return years;
}

}  // namespace fluxbench
