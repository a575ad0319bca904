#pragma once

#include "fluxbench/aggregate.hpp"
#include "fluxbench/dataset.hpp"
#include "fluxbench/metrics.hpp"
#include "fluxbench/models.hpp"
#include "fluxbench/scenarios.hpp"
#include "fluxbench/shiftdiag.hpp"
#include "fluxbench/synthgen.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fluxbench {

/// Knobs for the diagnose command on top of DiagnosticConfig.
struct DiagnoseSettings {
    DiagnosticConfig model;
    std::vector<std::string> curve_covariates{"TA"};
    bool model_based_curves = false;
    std::size_t curve_bins = 10;
    std::size_t max_pool_rows = 0;  // 0 keeps every row
};

/// Everything one run needs. Loaded from an INI file; relative paths resolve against
/// the file's directory.
struct RunConfig {
    std::filesystem::path data_path;
    std::filesystem::path output_dir;
    Schema schema;
    YearRange years;
    Target target = Target::Gpp;
    std::vector<ScenarioKind> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
    std::size_t n_test = 40;
    std::size_t n_val = 20;
    TemporalRules temporal;
    std::vector<std::string> models{"constant", "ols", "gbt"};

    // Seeds are never implicit. Commands that need one fail with a Config error when absent.
    std::optional<std::uint64_t> split_seed;
    std::optional<std::uint64_t> tuner_seed;
    std::optional<std::uint64_t> diagnose_seed;

    TunerSpec tuner;
    DiagnoseSettings diagnose;
    ReportOptions report;
    /// Presentation only. display_scaling shows ET x100; an explicit display_scale wins.
    bool display_scaling = false;
    std::optional<double> display_scale;
    double display_factor() const;
    std::optional<SynthSpec> synth;

    std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, std::string_view name) const;
};

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
/// Throws Config when the file is missing or malformed.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace fluxbench
