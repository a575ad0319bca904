#include "fluxbench/pipeline.hpp"

#include "fluxbench/error.hpp"
#include "fluxbench/io.hpp"
#include "fluxbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace fluxbench {

namespace fs = std::filesystem;

fs::path Layout::split(ScenarioKind kind) const { return root / "splits" / fmt::format("{}.json", to_string(kind)); }

fs::path Layout::model(ScenarioKind kind, std::string_view name) const {
    return root / "models" / std::string(to_string(kind)) / fmt::format("{}.json", name);
}

fs::path Layout::tuning(ScenarioKind kind, std::string_view name) const {
    return root / "models" / std::string(to_string(kind)) / fmt::format("{}.tuning.json", name);
}

fs::path Layout::predictions(ScenarioKind kind, std::string_view name) const {
    return predictions_dir(kind) / fmt::format("{}.csv", name);
}

fs::path Layout::predictions_dir(ScenarioKind kind) const {
    return root / "predictions" / std::string(to_string(kind));
}

fs::path Layout::diagnostics() const { return root / "diagnostics"; }
fs::path Layout::report() const { return root / "report"; }

namespace {

std::size_t scenario_index(ScenarioKind kind) {
    return static_cast<std::size_t>(std::find(kAllScenarios.begin(), kAllScenarios.end(), kind) -
                                    kAllScenarios.begin());
}

PooledSample cap_rows(PooledSample pool, std::size_t max_rows, std::uint64_t seed) {
    if (max_rows == 0 || pool.size() <= max_rows) return pool;
    SplitMix64 rng(seed);
    auto idx = permutation(pool.size(), rng);
    idx.resize(max_rows);
    std::sort(idx.begin(), idx.end());
    return pool.select(idx);
}

std::unique_ptr<Predictor> fit_model(const std::string& name, const Rows& train, const Rows& validation,
                                     const RunConfig& cfg, nlohmann::json* tuning) {
    if (name == "constant") return std::make_unique<ConstantPredictor>(fit_constant(train));
    if (name == "ols") return std::make_unique<LinearPredictor>(fit_ols(train));
    TunerSpec spec = cfg.tuner;
    spec.seed = cfg.require_seed(cfg.tuner_seed, "tuner");
    auto tuned = random_search(train, validation, spec);
    auto configs = nlohmann::json::array();
    for (const auto& c : draw_configs(spec)) configs.push_back(to_json(c));
    *tuning = {{"seed", spec.seed},
               {"selected", tuned.selected},
               {"validation_rmse", tuned.validation_rmse},
               {"configs", configs},
               {"best_iteration", tuned.model.best_iteration}};
    return std::make_unique<GbtModel>(std::move(tuned.model));
}

std::string format_value(double v) { return std::isfinite(v) ? fmt::format("{:.4g}", v) : std::string("NA"); }

}  // namespace

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw Error(ErrorCode::Config, "[data] path is not set");
    IngestOptions opt;
    opt.years = cfg.years;
    return ingest(cfg.data_path, cfg.schema, opt);
}

ScenarioSplit load_split(const RunConfig& cfg, ScenarioKind kind) {
    const auto path = Layout{cfg.output_dir}.split(kind);
    if (!fs::exists(path)) {
        throw Error(ErrorCode::Usage, fmt::format("split file '{}' not found; run the split command first", path.string()));
    }
    return split_from_json(read_json(path));
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.synth) throw Error(ErrorCode::Config, "the synth command needs a [synth] section");
    if (cfg.data_path.empty()) throw Error(ErrorCode::Config, "[data] path is not set");
    SynthTruth truth;
    const auto ds = generate(*cfg.synth, &truth);
    std::ostringstream csv;
    emit(ds, csv);
    write_atomic(cfg.data_path, csv.str());
    write_json(fs::path(cfg.data_path).concat(".truth.json"), to_json(truth));
    out << fmt::format("wrote {} records for {} sites to {}\n", ds.record_count(), ds.sites().size(),
                       cfg.data_path.string());
}

void cmd_ingest_check(const RunConfig& cfg, std::ostream& out) {
    if (cfg.data_path.empty()) throw Error(ErrorCode::Config, "[data] path is not set");
    IngestOptions opt;
    opt.strict = false;
    opt.years = cfg.years;
    IngestReport report;
    const auto ds = ingest(cfg.data_path, cfg.schema, opt, &report);
    nlohmann::json summary;
    summary["rows_read"] = report.rows_read;
    summary["records"] = ds.record_count();
    summary["sites"] = ds.sites().size();
    auto per_site = nlohmann::json::array();
    for (const auto& c : qc_counts(ds)) per_site.push_back({{"site", c.site.str()}, {"present", c.present}, {"valid", c.valid}});
    summary["per_site"] = per_site;
    auto rejected = nlohmann::json::array();
    for (const auto& r : report.rejected) rejected.push_back({{"row", r.row}, {"column", r.column}, {"message", r.message}});
    summary["rejected"] = rejected;
    out << summary.dump(2) << "\n";
    if (!report.rejected.empty()) {
        throw Error(ErrorCode::ParseError, fmt::format("{} rows rejected; first at row {} column {}",
                                                       report.rejected.size(), report.rejected.front().row,
                                                       report.rejected.front().column));
    }
}

void cmd_split(const RunConfig& cfg, std::ostream& out) {
    const auto ds = load_dataset(cfg);
    const Layout layout{cfg.output_dir};
    for (const auto kind : cfg.scenarios) {
        ScenarioSplit split;
        if (kind == ScenarioKind::Temporal) {
            split = build_temporal(ds, cfg.temporal);
            split.seed = cfg.split_seed.value_or(0);
        } else {
            const auto seed = cfg.require_seed(cfg.split_seed, "split");
            split = kind == ScenarioKind::Spatial ? build_spatial(ds, seed, cfg.n_test, cfg.n_val)
                                                  : build_temperature(ds, seed, cfg.n_test, cfg.n_val);
        }
        write_json(layout.split(kind), to_json(split));
        out << fmt::format("{}: train={} validation={} test={}\n", to_string(kind), split.train.size(),
                           split.validation.size(), split.test.size());
    }
}

void cmd_diagnose(const RunConfig& cfg, std::ostream& out) {
    const auto master = cfg.require_seed(cfg.diagnose_seed, "diagnose");
    const auto& settings = cfg.diagnose;
    // Splits are read first so a missing file fails before any data work.
    std::vector<ScenarioSplit> splits;
    for (const auto kind : cfg.scenarios) splits.push_back(load_split(cfg, kind));
    const auto ds = load_dataset(cfg);
    const Layout layout{cfg.output_dir};

    for (const auto& split : splits) {
        const auto k = scenario_index(split.kind);
        const auto seed = derive_seed(master, 30, k);
        const auto train = cap_rows(make_pool(ds, split.train, cfg.target, Origin::Train), settings.max_pool_rows,
                                    derive_seed(master, 31, k));
        const auto test = cap_rows(make_pool(ds, split.test, cfg.target, Origin::Test), settings.max_pool_rows,
                                   derive_seed(master, 32, k));

        ShiftReport report;
        report.scenario = std::string(to_string(split.kind));
        report.target = std::string(to_string(cfg.target));
        report.seed = seed;
        report.n_repeats = settings.model.n_repeats;
        auto recorded = [&](std::string_view what, auto&& fn) {
            try {
                fn();
            } catch (const Error& e) {
                if (e.code() == ErrorCode::Usage || e.code() == ErrorCode::Io) throw;
                report.notes.push_back(fmt::format("{}: {}", what, e.what()));
            }
        };
        recorded("covariate", [&] { report.covariate = covariate_shift_score(train, test, seed, settings.model); });
        recorded("train_marginal", [&] {
            report.train_marginal = conditional_shift_train_marginal(train, test, seed, settings.model);
        });
        recorded("shared", [&] { report.shared = conditional_shift_shared(train, test, seed, settings.model); });

        auto json = to_json(report);
        json["curves"] = nlohmann::json::array();
        const auto stem = fmt::format("{}_{}", to_string(split.kind), to_string(cfg.target));
        for (std::size_t c = 0; c < settings.curve_covariates.size(); ++c) {
            const auto& cov = settings.curve_covariates[c];
            CurveOptions opt;
            opt.n_bins = settings.curve_bins;
            opt.seed = derive_seed(master, 33, k * 1000 + c);
            auto emit_curve = [&](std::string_view kind, const RelationshipCurve& curve) {
                auto cj = to_json(curve);
                cj["kind"] = kind;
                json["curves"].push_back(cj);
                write_atomic(layout.diagnostics() / fmt::format("{}_{}_{}_train.csv", stem, kind, cov),
                             curve_plot_data(curve, false));
                write_atomic(layout.diagnostics() / fmt::format("{}_{}_{}_test.csv", stem, kind, cov),
                             curve_plot_data(curve, true));
            };
            recorded(fmt::format("curve {}", cov),
                     [&] { emit_curve("binned", binned_curve(train, test, cov, settings.model, opt)); });
            if (settings.model_based_curves) {
                recorded(fmt::format("model curve {}", cov),
                         [&] { emit_curve("model", model_based_curve(train, test, cov, settings.model, opt)); });
            }
        }
        json["notes"] = report.notes;
        write_json(layout.diagnostics() / fmt::format("{}.json", stem), json);
        out << fmt::format("{}: balanced accuracy {:.4f} (sd {:.4f})", report.scenario,
                           report.covariate.balanced_accuracy.mean, report.covariate.balanced_accuracy.sd);
        if (report.train_marginal) out << fmt::format(", train-marginal {:+.2f}%", report.train_marginal->percent_increase.mean);
        if (report.shared) out << fmt::format(", shared {:+.2f}%", report.shared->percent_increase.mean);
        out << fmt::format(", {} notes\n", report.notes.size());
    }
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
    std::vector<ScenarioSplit> splits;
    for (const auto kind : cfg.scenarios) splits.push_back(load_split(cfg, kind));
    const auto ds = load_dataset(cfg);
    const Layout layout{cfg.output_dir};
    for (const auto& split : splits) {
        const auto train = make_rows(ds, split.train, cfg.target);
        const auto validation = make_rows(ds, split.validation, cfg.target);
        for (const auto& name : cfg.models) {
            nlohmann::json tuning;
            const auto model = fit_model(name, train, validation, cfg, &tuning);
            write_json(layout.model(split.kind, name), model->to_json());
            if (!tuning.is_null()) write_json(layout.tuning(split.kind, name), tuning);
            out << fmt::format("{}/{}: fitted on {} rows\n", to_string(split.kind), name, train.y.size());
        }
    }
}

void cmd_predict(const RunConfig& cfg, std::ostream& out) {
    std::vector<ScenarioSplit> splits;
    for (const auto kind : cfg.scenarios) splits.push_back(load_split(cfg, kind));
    const auto ds = load_dataset(cfg);
    const Layout layout{cfg.output_dir};
    for (const auto& split : splits) {
        std::vector<RowKey> keys;
        const auto x = make_prediction_inputs(ds, split.test, keys);
        for (const auto& name : cfg.models) {
            const auto path = layout.model(split.kind, name);
            if (!fs::exists(path)) {
                throw Error(ErrorCode::Usage, fmt::format("model file '{}' not found; run the train command first", path.string()));
            }
            const auto model = predictor_from_json(read_json(path));
            const auto values = model->predict(x);
            PredictionSet set{name, {}};
            for (std::size_t i = 0; i < keys.size(); ++i) set.entries[{keys[i].site, keys[i].time}] = values[i];
            std::ostringstream csv;
            write_predictions(set, csv);
            write_atomic(layout.predictions(split.kind, name), csv.str());
            out << fmt::format("{}/{}: {} predictions\n", to_string(split.kind), name, keys.size());
        }
    }
}

void cmd_evaluate(const RunConfig& cfg, const std::vector<ExternalPredictions>& external, std::ostream& out) {
    std::vector<ScenarioPredictions> inputs;
    std::size_t n_files = 0;
    std::vector<PredictionSet> imported;
    for (const auto& e : external) imported.push_back(import_predictions(e.path, e.name));
    const Layout layout{cfg.output_dir};
    for (const auto kind : cfg.scenarios) {
        ScenarioPredictions sp{load_split(cfg, kind), {}};
        const auto dir = layout.predictions_dir(kind);
        std::vector<fs::path> files;
        if (fs::is_directory(dir)) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) sp.predictions.push_back(import_predictions(f, f.stem().string()));
        for (const auto& p : imported) sp.predictions.push_back(p);
        n_files += sp.predictions.size();
        inputs.push_back(std::move(sp));
    }
    if (n_files == 0) throw Error(ErrorCode::Usage, "no prediction files to evaluate");

    const auto ds = load_dataset(cfg);
    auto options = cfg.report;
    options.target = cfg.target;
    const auto table = build_report(ds, inputs, options);

    const auto dir = layout.report();
    write_json(dir / "metrics.json", to_json(table));
    for (const auto stat : table.statistics) {
        write_atomic(dir / fmt::format("table_{}.csv", to_string(stat)), table_csv(table, stat, cfg.display_factor()));
    }
    std::string skill_csv = "model,statistic,scenario,scale,skill\n";
    for (const auto& row : table.skills) {
        for (const auto& c : row.cells) {
            skill_csv += fmt::format("{},{},{},{},{}\n", row.model, to_string(row.statistic), to_string(c.scenario),
                                     to_string(c.scale), c.skill);
        }
        skill_csv += fmt::format("{},{},all,all,{}\n", row.model, to_string(row.statistic),
                                 std::isfinite(row.overall) ? fmt::format("{}", row.overall) : std::string("NA"));
    }
    write_atomic(dir / "skill.csv", skill_csv);

    std::string errors_csv = "scenario,scale,model,domain,rmse,n_pairs\n";
    std::map<std::tuple<ScenarioKind, Scale, std::string>, std::vector<DomainError>> groups;
    for (const auto& e : table.errors) {
        errors_csv += fmt::format("{},{},{},{},{},{}\n", to_string(e.scenario), to_string(e.scale), e.model,
                                  e.domain.to_string(), e.rmse, e.n_pairs);
        groups[{e.scenario, e.scale, e.model}].push_back(e);
    }
    write_atomic(dir / "domain_errors.csv", errors_csv);
    fs::remove_all(dir / "cdf");
    for (const auto& [key, errors] : groups) {
        const auto& [scenario, scale, model] = key;
        write_atomic(dir / "cdf" / fmt::format("{}_{}_{}.csv", to_string(scenario), to_string(scale), model),
                     cdf_csv(cdf_export(errors)));
    }
    out << fmt::format("scored {} models over {} scenarios; {} cells, {} flags; bundle in {}\n", table.models.size(),
                       table.scenarios.size(), table.cells.size(), table.flags.size(), dir.string());
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
    const auto dir = Layout{cfg.output_dir}.report();
    const auto path = dir / "metrics.json";
    if (!fs::exists(path)) {
        throw Error(ErrorCode::Usage, fmt::format("'{}' not found; run the evaluate command first", path.string()));
    }
    const auto j = read_json(path);
    std::string md = fmt::format("# Benchmark report ({})\n\nReference model: {}. Values are domain-level RMSE",
                                 j.at("target").get<std::string>(), j.at("reference").get<std::string>());
    md += cfg.display_factor() == 1.0 ? ".\n" : fmt::format(" multiplied by {}.\n", cfg.display_factor());

    std::map<std::tuple<std::string, std::string, std::string, std::string>, double> cells;
    for (const auto& c : j.at("cells")) {
        cells[{c.at("scenario"), c.at("scale"), c.at("model"), c.at("statistic")}] = c.at("value").get<double>();
    }
    std::map<std::pair<std::string, std::string>, double> overall;
    for (const auto& s : j.at("skills")) {
        overall[{s.at("model"), s.at("statistic")}] =
            s.at("overall").is_null() ? std::nan("") : s.at("overall").get<double>();
    }
    for (const auto& stat : j.at("statistics")) {
        md += fmt::format("\n## {}\n\n| model |", stat.get<std::string>());
        std::string rule = "|---|";
        for (const auto& scenario : j.at("scenarios")) {
            for (const auto& scale : j.at("scales")) {
                md += fmt::format(" {}/{} |", scenario.get<std::string>(), scale.get<std::string>());
                rule += "---:|";
            }
        }
        md += " skill |\n" + rule + "---:|\n";
        for (const auto& model : j.at("models")) {
            md += fmt::format("| {} |", model.get<std::string>());
            for (const auto& scenario : j.at("scenarios")) {
                for (const auto& scale : j.at("scales")) {
                    auto it = cells.find({scenario, scale, model, stat});
                    md += " " + (it == cells.end() ? std::string("NA") : format_value(it->second * cfg.display_factor())) + " |";
                }
            }
            auto it = overall.find({model, stat});
            md += " " + (it == overall.end() ? std::string("NA") : format_value(it->second)) + " |\n";
        }
    }
    if (!j.at("flags").empty()) {
        md += "\n## Flags\n\n";
        for (const auto& f : j.at("flags")) md += fmt::format("- {}\n", f.get<std::string>());
    }
    write_atomic(dir / "report.md", md);
    out << md;
}

}  // namespace fluxbench
