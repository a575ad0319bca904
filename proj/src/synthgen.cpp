#include "fluxbench/synthgen.hpp"

#include "fluxbench/error.hpp"
#include "fluxbench/rng.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <fmt/format.h>

namespace fluxbench {

namespace {

constexpr std::uint64_t kSiteParamStream = 1;
constexpr std::uint64_t kSiteRecordStream = 2;

int days_in_year(int year) {
    return std::chrono::year{year}.is_leap() ? 366 : 365;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::InvalidSpec, message);
}

}  // namespace

void SynthSpec::validate() const {
    require(n_sites >= 2, "n_sites must be at least 2");
    require(years.first <= years.last, "years must be an increasing range");
    require(hours_per_day >= 1 && hours_per_day <= 24, "hours_per_day must be in [1, 24]");
    require(day_stride >= 1, "day_stride must be positive");
    require(qc_dropout >= 0.0 && qc_dropout <= 1.0, "qc_dropout must be a probability");
    require(min_site_years >= 1 && min_site_years <= years.last - years.first + 1,
            "min_site_years must fit inside the year range");
    require(covariates.site_spread >= 0.0, "site_spread must be non-negative");
    for (std::size_t f = 0; f < kNumContinuous; ++f) {
        require(std::isfinite(covariates.mean[f]) && covariates.sd[f] > 0.0 && std::isfinite(covariates.sd[f]),
                fmt::format("feature {} needs a finite mean and positive sd", kContinuousNames[f]));
    }
    require(conditional.noise_sd >= 0.0, "noise_sd must be non-negative");
    for (const auto& t : conditional.terms) {
        require(t.i < kNumContinuous && t.j < kNumContinuous, "quadratic term index out of range");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < n_sites; ++i) names.insert(synth_site_name(i, n_sites));
    std::set<std::string> seen;
    for (const auto& o : overrides) {
        require(names.contains(o.site), fmt::format("override names unknown site '{}'", o.site));
        require(seen.insert(o.site).second, fmt::format("site '{}' overridden twice", o.site));
        require(!o.offset_feature || *o.offset_feature < kNumContinuous, "offset feature out of range");
    }
}

std::string synth_site_name(std::size_t index, std::size_t n_sites) {
    const int width = std::max<int>(3, static_cast<int>(fmt::format("{}", n_sites - 1).size()));
    return fmt::format("SY-{:0{}}", index, width);
}

double SiteTruth::expected_variance(std::size_t f) const {
    return sd[f] * sd[f] + 0.5 * amplitude[f] * amplitude[f];
}

const SiteTruth* SynthTruth::find(const SiteId& id) const {
    for (const auto& s : sites) {
        if (s.site == id) return &s;
    }
    return nullptr;
}

SynthTruth ground_truth(const SynthSpec& spec) {
    spec.validate();
    std::map<std::string, const SiteOverride*> overrides;
    for (const auto& o : spec.overrides) overrides[o.site] = &o;

    SynthTruth truth;
    truth.seed = spec.seed;
    truth.conditional = spec.conditional;
    truth.covariates = spec.covariates;
    const auto& cov = spec.covariates;
    const int n_years = spec.years.last - spec.years.first + 1;
    for (std::size_t i = 0; i < spec.n_sites; ++i) {
        SplitMix64 rng(derive_seed(spec.seed, kSiteParamStream, i));
        SiteTruth s;
        s.site = SiteId(synth_site_name(i, spec.n_sites));
        const auto pft_draw = static_cast<std::size_t>(rng.bounded(kNumPft));
        s.pft = cov.pft ? *cov.pft : static_cast<Pft>(pft_draw);
        s.lat = rng.uniform(-60.0, 70.0);
        s.lon = rng.uniform(-180.0, 180.0);
        for (std::size_t f = 0; f < kNumContinuous; ++f) {
            const double offset = rng.normal() * cov.site_spread;
            s.mean[f] = cov.mean[f] + offset * cov.sd[f];
            s.sd[f] = cov.sd[f];
            s.amplitude[f] = cov.seasonal_amplitude[f] * cov.sd[f];
        }
        const auto len_draw = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n_years - spec.min_site_years + 1)));
        s.first_year = spec.years.first;
        s.last_year = spec.years.last;
        if (spec.ragged_years) {
            const int len = spec.min_site_years + len_draw;
            s.first_year = spec.years.first + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n_years - len + 1)));
            s.last_year = s.first_year + len - 1;
        }
        if (auto it = overrides.find(s.site.str()); it != overrides.end()) {
            const auto& o = *it->second;
            s.flipped = o.flip;
            s.gain = o.gain;
            if (o.offset_feature) s.mean[*o.offset_feature] += o.offset_sd * cov.sd[*o.offset_feature];
        }
        truth.sites.push_back(std::move(s));
    }
    return truth;
}

double conditional_mean(const ConditionalModel& model, const CovariateModel& base, const SiteTruth& site,
                        const FeatureVector& x) {
    std::array<double, kNumContinuous> z{};
    for (std::size_t f = 0; f < kNumContinuous; ++f) z[f] = (x.continuous[f] - base.mean[f]) / base.sd[f];
    double dev = 0.0;
    for (std::size_t f = 0; f < kNumContinuous; ++f) dev += model.linear[f] * z[f];
    for (const auto& t : model.terms) dev += t.coef * z[t.i] * z[t.j];
    dev *= site.gain;
    if (site.flipped) dev = -dev;
    return model.intercept + dev;
}

Dataset generate(const SynthSpec& spec, SynthTruth* truth_out) {
    auto truth = ground_truth(spec);
    std::vector<SiteData> sites(truth.sites.size());
    const auto n = static_cast<std::ptrdiff_t>(sites.size());
    const double omega = 2.0 * std::numbers::pi / 365.25;

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& st = truth.sites[static_cast<std::size_t>(i)];
        SplitMix64 rng(derive_seed(spec.seed, kSiteRecordStream, static_cast<std::uint64_t>(i)));
        SiteData& sd = sites[static_cast<std::size_t>(i)];
        sd.meta = {st.site, st.lat, st.lon, st.pft};
        for (int year = st.first_year; year <= st.last_year; ++year) {
            const auto jan1 = HourTimestamp::from_civil(year, 1, 1, 0).hours();
            for (int doy = 1; doy <= days_in_year(year); doy += spec.day_stride) {
                const double season = std::sin(omega * (doy - 1));
                for (int h = 0; h < spec.hours_per_day; ++h) {
                    const int hour = h * 24 / spec.hours_per_day;
                    HourlyRecord r;
                    r.time = HourTimestamp(jan1 + static_cast<std::int64_t>(doy - 1) * 24 + hour);
                    r.features.pft = st.pft;
                    for (std::size_t f = 0; f < kNumContinuous; ++f) {
                        r.features.continuous[f] = st.mean[f] + st.amplitude[f] * season + st.sd[f] * rng.normal();
                    }
                    const auto& cm = spec.conditional;
                    const double core = conditional_mean(cm, spec.covariates, st, r.features) + cm.noise_sd * rng.normal();
                    r.targets.gpp = core;
                    r.targets.et = cm.et_scale * (core + cm.noise_sd * rng.normal());
                    r.targets.nee = cm.nee_scale * (core + cm.noise_sd * rng.normal());
                    r.qc = rng.uniform() >= spec.qc_dropout;
                    sd.records.push_back(r);
                }
            }
        }
    }
    Dataset ds(std::move(sites), spec.years);
    if (truth_out) *truth_out = std::move(truth);
    return ds;
}

std::string ShiftOracle::label() const {
    if (covariate_shift && conditional_shift) return "both";
    if (covariate_shift) return "covariate";
    if (conditional_shift) return "conditional";
    return "none";
}

namespace {

using Law = std::vector<double>;

Law covariate_law(const SiteTruth& s) {
    Law law{static_cast<double>(s.pft)};
    for (std::size_t f = 0; f < kNumContinuous; ++f) {
        law.push_back(s.mean[f]);
        law.push_back(s.sd[f]);
        law.push_back(s.amplitude[f]);
    }
    return law;
}

Law conditional_law(const SiteTruth& s) { return {s.flipped ? -s.gain : s.gain}; }

template <typename F>
std::map<Law, double> mixture(const SynthTruth& truth, std::span<const DomainKey> domains, F law_of) {
    std::map<Law, double> out;
    for (const auto& d : domains) {
        const auto* s = truth.find(d.site);
        if (s) out[law_of(*s)] += 1.0;
    }
    double total = 0.0;
    for (const auto& [_, c] : out) total += c;
    for (auto& [_, c] : out) c /= total;
    return out;
}

}  // namespace

ShiftOracle shift_oracle(const SynthSpec& spec, const ScenarioSplit& split) {
    const auto truth = ground_truth(spec);
    ShiftOracle o;
    o.covariate_shift = mixture(truth, split.train, covariate_law) != mixture(truth, split.test, covariate_law);
    // Conditional laws only differ where the conditional mean differs; a flip with zero gain is a no-op.
    o.conditional_shift = mixture(truth, split.train, conditional_law) != mixture(truth, split.test, conditional_law);
    return o;
}

nlohmann::json to_json(const SynthTruth& truth) {
    using nlohmann::json;
    const auto& c = truth.conditional;
    json terms = json::array();
    for (const auto& t : c.terms) terms.push_back({{"i", kContinuousNames[t.i]}, {"j", kContinuousNames[t.j]}, {"coef", t.coef}});
    json linear = json::object();
    for (std::size_t f = 0; f < kNumContinuous; ++f) linear[std::string(kContinuousNames[f])] = c.linear[f];
    json base = json::object();
    for (std::size_t f = 0; f < kNumContinuous; ++f) {
        base[std::string(kContinuousNames[f])] = {{"mean", truth.covariates.mean[f]}, {"sd", truth.covariates.sd[f]}};
    }
    json sites = json::array();
    for (const auto& s : truth.sites) {
        json features = json::object();
        for (std::size_t f = 0; f < kNumContinuous; ++f) {
            features[std::string(kContinuousNames[f])] = {
                {"mean", s.mean[f]}, {"sd", s.sd[f]}, {"seasonal_amplitude", s.amplitude[f]}};
        }
        sites.push_back({{"site", s.site.str()},
                         {"pft", to_string(s.pft)},
                         {"lat", s.lat},
                         {"lon", s.lon},
                         {"first_year", s.first_year},
                         {"last_year", s.last_year},
                         {"conditional_shifted", s.flipped || s.gain != 1.0},
                         {"flipped", s.flipped},
                         {"gain", s.gain},
                         {"features", features}});
    }
    return {{"seed", truth.seed},
            {"conditional",
             {{"intercept", c.intercept},
              {"linear", linear},
              {"terms", terms},
              {"noise_sd", c.noise_sd},
              {"et_scale", c.et_scale},
              {"nee_scale", c.nee_scale},
              {"standardization", base}}},
            {"sites", sites}};
}

}  // namespace fluxbench
