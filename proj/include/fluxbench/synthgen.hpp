#pragma once

#include "fluxbench/dataset.hpp"
#include "fluxbench/scenarios.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fluxbench {

/// Per-site Gaussian covariates with an optional day-of-year sinusoid.
///
/// For site s and feature f:
///   x = mean[f] + site_offset[s][f] * sd[f] + A[f] * sd[f] * sin(2 pi (doy - 1) / 365.25) + sd[f] * z
/// where site_offset ~ N(0, site_spread^2) is drawn once per site and z ~ N(0, 1) per hour.
struct CovariateModel {
    std::array<double, kNumContinuous> mean{12.0, 8.0, 200.0, 300.0, 300.0, 0.0, 0.0, 290.0, 280.0, 0.35, 0.15, 0.1};
    std::array<double, kNumContinuous> sd{8.0, 5.0, 150.0, 200.0, 100.0, 40.0, 20.0, 10.0, 8.0, 0.15, 0.08, 0.1};
    std::array<double, kNumContinuous> seasonal_amplitude{1.0, 0.0, 0.8};  // in units of sd
    double site_spread = 0.5;
    std::optional<Pft> pft;  // shared class; drawn per site when unset
};

/// Quadratic term c * z_i * z_j on standardized features z = (x - mean) / sd. i == j is a square.
struct QuadTerm {
    std::size_t i = 0;
    std::size_t j = 0;
    double coef = 0.0;
};

/// Y = intercept + sum linear[f] z_f + sum terms + noise, on the model's base standardization.
struct ConditionalModel {
    double intercept = 4.0;
    std::array<double, kNumContinuous> linear{1.5, -0.6, 0.8};
    std::vector<QuadTerm> terms{{0, 0, 0.5}, {0, 2, 0.7}};
    double noise_sd = 0.3;
    /// GPP is the core response; ET and NEE are fixed linear maps of it with their own noise.
    double et_scale = 0.05;
    double nee_scale = -0.6;
};

/// Site-specific departures from the shared laws.
struct SiteOverride {
    std::string site;
    bool flip = false;   // the conditional mean becomes 2 * intercept - g(x)
    double gain = 1.0;   // scales g(x) - intercept
    std::optional<std::size_t> offset_feature;
    double offset_sd = 0.0;  // added to the feature mean, in units of sd
};

struct SynthSpec {
    std::size_t n_sites = 10;
    YearRange years;
    int hours_per_day = 24;  // evenly spaced hours, starting at 00
    int day_stride = 1;      // keep day-of-year 1, 1 + k, 1 + 2k, ...
    /// When set, each site covers a random contiguous run of at least min_site_years years.
    bool ragged_years = false;
    int min_site_years = 1;
    CovariateModel covariates;
    ConditionalModel conditional;
    std::vector<SiteOverride> overrides;
    double qc_dropout = 0.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws InvalidSpec
};

std::string synth_site_name(std::size_t index, std::size_t n_sites);

struct SiteTruth {
    SiteId site;
    Pft pft = Pft::CRO;
    double lat = 0.0;
    double lon = 0.0;
    int first_year = 0;
    int last_year = 0;
    std::array<double, kNumContinuous> mean{};       // level before the seasonal term
    std::array<double, kNumContinuous> sd{};         // hourly noise sd
    std::array<double, kNumContinuous> amplitude{};  // absolute seasonal amplitude
    bool flipped = false;
    double gain = 1.0;

    /// Marginal variance over whole years: sd^2 + amplitude^2 / 2.
    double expected_variance(std::size_t f) const;
};

struct SynthTruth {
    std::uint64_t seed = 0;
    ConditionalModel conditional;
    CovariateModel covariates;
    std::vector<SiteTruth> sites;

    const SiteTruth* find(const SiteId& id) const;
};

/// Site parameters only; cheap and identical to what generate() uses.
SynthTruth ground_truth(const SynthSpec& spec);

/// Noise-free conditional mean of the core response for one site.
double conditional_mean(const ConditionalModel& model, const CovariateModel& base, const SiteTruth& site,
                        const FeatureVector& x);

Dataset generate(const SynthSpec& spec, SynthTruth* truth = nullptr);

struct ShiftOracle {
    bool covariate_shift = false;
    bool conditional_shift = false;

    std::string label() const;  // "none", "covariate", "conditional" or "both"
};

/// Whether the pooled train and test domains differ in covariate law and in conditional law,
/// from the generator parameters. Pools are compared as mixtures weighted by site count.
ShiftOracle shift_oracle(const SynthSpec& spec, const ScenarioSplit& split);

nlohmann::json to_json(const SynthTruth& truth);

}  // namespace fluxbench
