#include "fluxbench/config.hpp"

#include "fluxbench/error.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace fluxbench {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::Config, message); }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = std::min(s.find(sep, start), s.size());
        auto item = trim(s.substr(start, end - start));
        if (!item.empty()) out.push_back(std::move(item));
        start = end + 1;
    }
    return out;
}

class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    bool present() const { return tree_ != nullptr; }

    std::optional<std::string> raw(const std::string& key) const {
        if (!tree_) return std::nullopt;
        if (auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) return trim(*v);
        return std::nullopt;
    }

    template <typename T>
    void read(const std::string& key, T& out) const {
        if (auto v = raw(key)) out = parse<T>(key, *v);
    }

    template <typename T>
    std::optional<T> get(const std::string& key) const {
        if (auto v = raw(key)) return parse<T>(key, *v);
        return std::nullopt;
    }

    template <typename T>
    T parse(const std::string& key, const std::string& text) const {
        if constexpr (std::is_same_v<T, std::string>) {
            return text;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (text == "true" || text == "1" || text == "yes") return true;
            if (text == "false" || text == "0" || text == "no") return false;
            bad(key, text);
        } else if constexpr (std::is_floating_point_v<T>) {
            try {
                std::size_t used = 0;
                const double v = std::stod(text, &used);
                if (used != text.size()) bad(key, text);
                return static_cast<T>(v);
            } catch (const std::logic_error&) {
                bad(key, text);
            }
        } else {
            T v{};
            const auto* end = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(text.data(), end, v);
            if (ec != std::errc{} || ptr != end) bad(key, text);
            return v;
        }
    }

    void check_keys(std::initializer_list<std::string_view> allowed) const {
        if (!tree_) return;
        for (const auto& [key, _] : *tree_) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                fail(fmt::format("unknown key '{}' in section [{}]", key, name_));
            }
        }
    }

    [[noreturn]] void bad(const std::string& key, const std::string& text) const {
        fail(fmt::format("[{}] {}: cannot parse '{}'", name_, key, text));
    }

    const std::string& name() const { return name_; }

private:
    const pt::ptree* tree_;
    std::string name_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

Target target_of(const std::string& text) {
    auto t = parse_target(text);
    if (!t) fail(fmt::format("target must be one of et, gpp, nee (got '{}')", text));
    return *t;
}

std::size_t feature_of(const std::string& name) {
    auto f = continuous_index(name);
    if (!f) fail(fmt::format("unknown covariate '{}'", name));
    return *f;
}

void read_gbt(const Section& s, const std::string& prefix, GbtConfig& cfg) {
    s.read(prefix + "trees", cfg.n_trees);
    s.read(prefix + "depth", cfg.max_depth);
    s.read(prefix + "learning_rate", cfg.learning_rate);
    s.read(prefix + "subsample_rows", cfg.subsample_rows);
    s.read(prefix + "early_stopping", cfg.early_stopping_rounds);
    s.read(prefix + "max_bins", cfg.max_bins);
}

SynthSpec read_synth(const Section& s, const YearRange& years) {
    s.check_keys({"n_sites", "first_year", "last_year", "hours_per_day", "day_stride", "ragged_years",
                  "min_site_years", "site_spread", "pft", "qc_dropout", "noise_sd", "seed", "flip", "gain",
                  "offset"});
    SynthSpec spec;
    spec.years = years;
    s.read("n_sites", spec.n_sites);
    s.read("first_year", spec.years.first);
    s.read("last_year", spec.years.last);
    s.read("hours_per_day", spec.hours_per_day);
    s.read("day_stride", spec.day_stride);
    s.read("ragged_years", spec.ragged_years);
    s.read("min_site_years", spec.min_site_years);
    s.read("site_spread", spec.covariates.site_spread);
    s.read("qc_dropout", spec.qc_dropout);
    s.read("noise_sd", spec.conditional.noise_sd);
    if (auto p = s.raw("pft")) {
        auto pft = parse_pft(*p);
        if (!pft) fail(fmt::format("unknown PFT '{}'", *p));
        spec.covariates.pft = *pft;
    }
    auto seed = s.get<std::uint64_t>("seed");
    if (!seed) fail("[synth] seed is required");
    spec.seed = *seed;

    std::map<std::string, SiteOverride> overrides;
    auto entry = [&](const std::string& site) -> SiteOverride& {
        auto& o = overrides[site];
        o.site = site;
        return o;
    };
    for (const auto& site : split_list(s.raw("flip").value_or(""))) entry(site).flip = true;
    for (const auto& item : split_list(s.raw("gain").value_or(""))) {
        auto parts = split_list(item, ':');
        if (parts.size() != 2) fail(fmt::format("gain entries are SITE:FACTOR (got '{}')", item));
        entry(parts[0]).gain = s.parse<double>("gain", parts[1]);
    }
    for (const auto& item : split_list(s.raw("offset").value_or(""))) {
        auto parts = split_list(item, ':');
        if (parts.size() != 3) fail(fmt::format("offset entries are SITE:COVARIATE:SD (got '{}')", item));
        auto& o = entry(parts[0]);
        o.offset_feature = feature_of(parts[1]);
        o.offset_sd = s.parse<double>("offset", parts[2]);
    }
    for (auto& [_, o] : overrides) spec.overrides.push_back(std::move(o));
    return spec;
}

}  // namespace

std::uint64_t RunConfig::require_seed(const std::optional<std::uint64_t>& seed, std::string_view name) const {
    if (!seed) fail(fmt::format("[seeds] {} is required for this command", name));
    return *seed;
}

double RunConfig::display_factor() const {
    if (display_scale) return *display_scale;
    return display_scaling && target == Target::Et ? 100.0 : 1.0;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(fmt::format("malformed config: {}", e.message()));
    }
    static const std::set<std::string> kSections = {"data",  "run",      "seeds",  "split", "tuner",
                                                    "diagnose", "report", "schema", "synth"};
    for (const auto& [name, _] : tree) {
        if (!kSections.contains(name)) fail(fmt::format("unknown section [{}]", name));
    }
    auto section = [&](const std::string& name) {
        auto child = tree.get_child_optional(name);
        return Section(child ? &*child : nullptr, name);
    };

    RunConfig cfg;
    cfg.output_dir = resolve(base_dir, "fluxbench-out");

    const auto data = section("data");
    data.check_keys({"path", "first_year", "last_year", "delimiter"});
    if (auto p = data.raw("path")) cfg.data_path = resolve(base_dir, *p);
    data.read("first_year", cfg.years.first);
    data.read("last_year", cfg.years.last);
    if (auto d = data.raw("delimiter")) {
        if (*d == "tab" || *d == "\\t") {
            cfg.schema.delimiter = '\t';
        } else if (d->size() == 1) {
            cfg.schema.delimiter = (*d)[0];
        } else {
            fail(fmt::format("delimiter must be one character or 'tab' (got '{}')", *d));
        }
    }
    if (cfg.years.first > cfg.years.last) fail("[data] first_year must not exceed last_year");

    const auto schema = section("schema");
    if (schema.present()) {
        for (const auto& [key, value] : tree.get_child("schema")) cfg.schema.rename[key] = trim(value.data());
    }

    const auto run = section("run");
    run.check_keys({"target", "scenarios", "models", "output"});
    if (auto t = run.raw("target")) cfg.target = target_of(*t);
    if (auto list = run.raw("scenarios")) {
        cfg.scenarios.clear();
        for (const auto& item : split_list(*list)) {
            auto kind = parse_scenario_kind(item);
            if (!kind) fail(fmt::format("unknown scenario '{}'", item));
            if (std::find(cfg.scenarios.begin(), cfg.scenarios.end(), *kind) == cfg.scenarios.end()) {
                cfg.scenarios.push_back(*kind);
            }
        }
        if (cfg.scenarios.empty()) fail("[run] scenarios is empty");
    }
    if (auto list = run.raw("models")) {
        cfg.models = split_list(*list);
        for (const auto& m : cfg.models) {
            if (m != "constant" && m != "ols" && m != "gbt") fail(fmt::format("unknown model '{}'", m));
        }
    }
    if (auto out = run.raw("output")) cfg.output_dir = resolve(base_dir, *out);

    const auto seeds = section("seeds");
    seeds.check_keys({"split", "tuner", "diagnose"});
    cfg.split_seed = seeds.get<std::uint64_t>("split");
    cfg.tuner_seed = seeds.get<std::uint64_t>("tuner");
    cfg.diagnose_seed = seeds.get<std::uint64_t>("diagnose");

    const auto split = section("split");
    split.check_keys({"n_test", "n_val", "min_years", "validation_year", "first_test_year"});
    split.read("n_test", cfg.n_test);
    split.read("n_val", cfg.n_val);
    split.read("min_years", cfg.temporal.min_years);
    split.read("validation_year", cfg.temporal.validation_year);
    split.read("first_test_year", cfg.temporal.first_test_year);

    const auto tuner = section("tuner");
    tuner.check_keys({"n_configs", "trees_min", "trees_max", "depth_min", "depth_max", "lr_min", "lr_max",
                      "subsample_min", "subsample_max", "early_stopping"});
    auto& r = cfg.tuner.ranges;
    tuner.read("n_configs", cfg.tuner.n_configs);
    tuner.read("trees_min", r.n_trees_min);
    tuner.read("trees_max", r.n_trees_max);
    tuner.read("depth_min", r.depth_min);
    tuner.read("depth_max", r.depth_max);
    tuner.read("lr_min", r.lr_min);
    tuner.read("lr_max", r.lr_max);
    tuner.read("subsample_min", r.subsample_min);
    tuner.read("subsample_max", r.subsample_max);
    tuner.read("early_stopping", r.early_stopping_rounds);
    if (cfg.tuner.n_configs < 1 || r.n_trees_min < 1 || r.n_trees_min > r.n_trees_max || r.depth_min < 1 ||
        r.depth_min > r.depth_max || !(r.lr_min > 0.0) || r.lr_min > r.lr_max || !(r.subsample_min > 0.0) ||
        r.subsample_min > r.subsample_max || r.subsample_max > 1.0) {
        fail("[tuner] ranges are inconsistent");
    }

    const auto diag = section("diagnose");
    diag.check_keys({"repeats", "epsilon", "clip_quantile", "holdout_fraction", "classifier_trees",
                     "classifier_depth", "classifier_learning_rate", "classifier_subsample_rows",
                     "classifier_early_stopping", "classifier_max_bins", "regressor_trees", "regressor_depth",
                     "regressor_learning_rate", "regressor_subsample_rows", "regressor_early_stopping",
                     "regressor_max_bins", "curves", "model_curves", "curve_bins", "max_pool_rows"});
    auto& d = cfg.diagnose;
    diag.read("repeats", d.model.n_repeats);
    diag.read("epsilon", d.model.weights.epsilon);
    diag.read("clip_quantile", d.model.weights.clip_quantile);
    diag.read("holdout_fraction", d.model.holdout_fraction);
    read_gbt(diag, "classifier_", d.model.classifier);
    read_gbt(diag, "regressor_", d.model.regressor);
    if (auto list = diag.raw("curves")) {
        d.curve_covariates = split_list(*list);
        for (const auto& c : d.curve_covariates) feature_of(c);
    }
    diag.read("model_curves", d.model_based_curves);
    diag.read("curve_bins", d.curve_bins);
    diag.read("max_pool_rows", d.max_pool_rows);
    if (d.model.n_repeats < 1) fail("[diagnose] repeats must be positive");
    if (d.curve_bins < 1) fail("[diagnose] curve_bins must be positive");
    if (!(d.model.holdout_fraction > 0.0 && d.model.holdout_fraction < 1.0)) {
        fail("[diagnose] holdout_fraction must be in (0, 1)");
    }
    try {
        d.model.weights.validate();
        d.model.classifier.validate();
        d.model.regressor.validate();
    } catch (const Error& e) {
        fail(fmt::format("[diagnose] {}", e.what()));
    }

    const auto report = section("report");
    report.check_keys({"scales", "statistics", "reference", "display_scale", "display_scaling"});
    cfg.report.target = cfg.target;
    if (auto list = report.raw("scales")) {
        cfg.report.scales.clear();
        for (const auto& item : split_list(*list)) {
            auto s = parse_scale(item);
            if (!s) fail(fmt::format("unknown scale '{}'", item));
            cfg.report.scales.push_back(*s);
        }
    }
    if (auto list = report.raw("statistics")) {
        cfg.report.statistics.clear();
        for (const auto& item : split_list(*list)) {
            auto s = parse_statistic(item);
            if (!s) fail(fmt::format("unknown statistic '{}'", item));
            cfg.report.statistics.push_back(*s);
        }
    }
    report.read("reference", cfg.report.reference);
    report.read("display_scaling", cfg.display_scaling);
    cfg.display_scale = report.get<double>("display_scale");
    if (cfg.report.scales.empty() || cfg.report.statistics.empty()) fail("[report] needs scales and statistics");

    const auto synth = section("synth");
    if (synth.present()) cfg.synth = read_synth(synth, cfg.years);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(fmt::format("cannot open config file '{}'", path.string()));
    return parse_config(in, path.parent_path());
}

}  // namespace fluxbench
