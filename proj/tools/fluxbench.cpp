// Command-line front end. Every failure prints one JSON object on stderr and exits with
// the code of its error category.
#include "fluxbench/error.hpp"
#include "fluxbench/pipeline.hpp"

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

namespace {

int report_failure(std::string_view category, const std::string& message, int code) {
    nlohmann::json j{{"error", category}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace fluxbench;

    CLI::App app{"fluxbench: extrapolation benchmark harness for multi-site hourly flux data"};
    app.require_subcommand(1);

    std::string config_path;
    int jobs = 0;
    std::string output_override;
    std::string target_override;
    app.add_option("-c,--config", config_path, "run configuration (INI)")->required()->check(CLI::ExistingFile);
    app.add_option("-j,--jobs", jobs, "worker threads (default: hardware parallelism)")->check(CLI::PositiveNumber);
    app.add_option("-t,--target", target_override, "target flux: et, gpp or nee (overrides config)");
    app.add_option("-o,--output", output_override, "output directory (overrides config and FLUXBENCH_OUTPUT_ROOT)");

    std::vector<std::string> scenario_filter;
    std::vector<std::string> model_filter;
    auto add_filters = [&](CLI::App* cmd, bool models) {
        cmd->add_option("-s,--scenario", scenario_filter, "restrict to these scenarios");
        if (models) cmd->add_option("-m,--model", model_filter, "restrict to these models");
    };

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset and its ground-truth sidecar");
    auto* ingest_check = app.add_subcommand("ingest-check", "validate the data file and print per-site counts");
    auto* split = app.add_subcommand("split", "build scenario splits");
    auto* diagnose = app.add_subcommand("diagnose", "covariate and conditional shift diagnostics");
    auto* train = app.add_subcommand("train", "fit baseline models");
    auto* predict = app.add_subcommand("predict", "write test-domain predictions");
    auto* evaluate = app.add_subcommand("evaluate", "score predictions and write the report bundle");
    auto* report = app.add_subcommand("report", "render the report bundle as Markdown");
    add_filters(split, false);
    add_filters(diagnose, false);
    add_filters(train, true);
    add_filters(predict, true);
    add_filters(evaluate, false);
    std::vector<std::string> curves;
    diagnose->add_option("--curve", curves, "covariates for relationship curves (overrides config)");
    std::vector<std::string> imports;
    evaluate->add_option("--import", imports, "external predictions as NAME=PATH");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_failure(to_string(ErrorCode::Usage), e.what(), static_cast<int>(ErrorCode::Usage));
    }

    try {
        if (jobs > 0) omp_set_num_threads(jobs);
        auto cfg = load_config(config_path);
        if (const char* root = std::getenv("FLUXBENCH_OUTPUT_ROOT"); root && *root) cfg.output_dir = root;
        if (!output_override.empty()) cfg.output_dir = output_override;
        if (!scenario_filter.empty()) {
            cfg.scenarios.clear();
            for (const auto& s : scenario_filter) {
                auto kind = parse_scenario_kind(s);
                if (!kind) throw Error(ErrorCode::Usage, "unknown scenario '" + s + "'");
                cfg.scenarios.push_back(*kind);
            }
        }
        if (!curves.empty()) {
            for (const auto& c : curves) {
                if (!continuous_index(c)) throw Error(ErrorCode::Usage, "unknown covariate '" + c + "'");
            }
            cfg.diagnose.curve_covariates = curves;
        }
        if (!target_override.empty()) {
            auto target = parse_target(target_override);
            if (!target) throw Error(ErrorCode::Config, "target must be one of et, gpp, nee (got '" + target_override + "')");
            cfg.target = *target;
            cfg.report.target = *target;
        }
        if (!model_filter.empty()) {
            for (const auto& m : model_filter) {
                if (m != "constant" && m != "ols" && m != "gbt") throw Error(ErrorCode::Usage, "unknown model '" + m + "'");
            }
            cfg.models = model_filter;
        }

        if (*synth) cmd_synth(cfg, std::cout);
        if (*ingest_check) cmd_ingest_check(cfg, std::cout);
        if (*split) cmd_split(cfg, std::cout);
        if (*diagnose) cmd_diagnose(cfg, std::cout);
        if (*train) cmd_train(cfg, std::cout);
        if (*predict) cmd_predict(cfg, std::cout);
        if (*evaluate) {
            std::vector<ExternalPredictions> external;
            for (const auto& item : imports) {
                const auto eq = item.find('=');
                if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::Usage, "--import expects NAME=PATH");
                external.push_back({item.substr(0, eq), item.substr(eq + 1)});
            }
            cmd_evaluate(cfg, external, std::cout);
        }
        if (*report) cmd_report(cfg, std::cout);
    } catch (const Error& e) {
        return report_failure(to_string(e.code()), e.what(), e.exit_code());
    } catch (const std::filesystem::filesystem_error& e) {
        return report_failure(to_string(ErrorCode::Io), e.what(), static_cast<int>(ErrorCode::Io));
    } catch (const std::exception& e) {
        return report_failure("Internal", e.what(), 1);
    }
    return 0;
}
