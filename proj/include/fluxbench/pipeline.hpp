#pragma once

#include "fluxbench/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fluxbench {

/// Output locations below RunConfig::output_dir.
struct Layout {
    std::filesystem::path root;

    std::filesystem::path split(ScenarioKind kind) const;
    std::filesystem::path model(ScenarioKind kind, std::string_view name) const;
    std::filesystem::path tuning(ScenarioKind kind, std::string_view name) const;
    std::filesystem::path predictions(ScenarioKind kind, std::string_view name) const;
    std::filesystem::path predictions_dir(ScenarioKind kind) const;
    std::filesystem::path diagnostics() const;
    std::filesystem::path report() const;
};

/// Loads the configured data file (strict ingest). Throws Config when no path is set.
Dataset load_dataset(const RunConfig& cfg);
/// Reads the split file written by cmd_split. A missing file is a Usage error.
ScenarioSplit load_split(const RunConfig& cfg, ScenarioKind kind);

/// Each command writes its artifacts atomically and a short summary to `out`.
void cmd_synth(const RunConfig& cfg, std::ostream& out);
void cmd_ingest_check(const RunConfig& cfg, std::ostream& out);
void cmd_split(const RunConfig& cfg, std::ostream& out);
void cmd_diagnose(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_predict(const RunConfig& cfg, std::ostream& out);

struct ExternalPredictions {
    std::string name;
    std::filesystem::path path;
};

/// Scores every prediction file under predictions/<scenario>/ plus the external files
/// (applied to every scenario) and writes the report bundle.
void cmd_evaluate(const RunConfig& cfg, const std::vector<ExternalPredictions>& external, std::ostream& out);
/// Renders report/metrics.json as Markdown tables (report/report.md) and prints it.
void cmd_report(const RunConfig& cfg, std::ostream& out);

}  // namespace fluxbench
