#include "fluxbench/metrics.hpp"

#include "fluxbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace fluxbench {

std::string_view to_string(Statistic s) { return s == Statistic::Median ? "median" : "q90"; }

std::optional<Statistic> parse_statistic(std::string_view text) {
    if (text == "median") return Statistic::Median;
    if (text == "q90") return Statistic::Q90;
    return std::nullopt;
}

double quantile_of(Statistic s) { return s == Statistic::Median ? 0.5 : 0.9; }

DomainError domain_rmse(const AggregatedPairs& pairs, ScenarioKind scenario, std::string model) {
    if (pairs.pairs.empty()) throw Error(ErrorCode::EmptyDomain, pairs.domain.to_string());
    double acc = 0.0;
    for (const auto& p : pairs.pairs) {
        const double d = p.prediction - p.truth;
        acc += d * d;
    }
    return {pairs.domain, scenario, pairs.scale, std::move(model),
            std::sqrt(acc / static_cast<double>(pairs.pairs.size())), pairs.pairs.size()};
}

double linear_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::EmptySet, "quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double rank = 1.0 + static_cast<double>(values.size() - 1) * q;  // 1-based
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    if (lo >= values.size()) return values.back();
    return values[lo - 1] + frac * (values[lo] - values[lo - 1]);
}

MetricCell summarize(std::span<const DomainError> errors, Statistic statistic) {
    if (errors.empty()) throw Error(ErrorCode::EmptySet, "no domain errors to summarize");
    std::vector<double> v;
    v.reserve(errors.size());
    for (const auto& e : errors) v.push_back(e.rmse);
    MetricCell cell;
    cell.scenario = errors.front().scenario;
    cell.scale = errors.front().scale;
    cell.model = errors.front().model;
    cell.statistic = statistic;
    cell.value = linear_quantile(std::move(v), quantile_of(statistic));
    cell.n_domains = errors.size();
    cell.low_support = errors.size() < kLowSupportDomains;
    return cell;
}

SkillRow skill(std::span<const MetricCell> model_cells, std::span<const MetricCell> reference_cells) {
    SkillRow row;
    if (!model_cells.empty()) {
        row.model = model_cells.front().model;
        row.statistic = model_cells.front().statistic;
    } else if (!reference_cells.empty()) {
        row.statistic = reference_cells.front().statistic;
    }
    std::map<std::pair<ScenarioKind, Scale>, const MetricCell*> ref;
    for (const auto& c : reference_cells) {
        if (c.statistic != row.statistic) throw Error(ErrorCode::CellMismatch, "reference cells mix statistics");
        ref[{c.scenario, c.scale}] = &c;
    }
    std::set<std::pair<ScenarioKind, Scale>> seen;
    double total = 0.0;
    for (const auto& c : model_cells) {
        if (c.statistic != row.statistic) throw Error(ErrorCode::CellMismatch, "model cells mix statistics");
        auto it = ref.find({c.scenario, c.scale});
        if (it == ref.end()) {
            throw Error(ErrorCode::CellMismatch,
                        fmt::format("no reference cell for {}/{}", to_string(c.scenario), to_string(c.scale)));
        }
        if (!(it->second->value > 0.0)) {
            throw Error(ErrorCode::ZeroReference,
                        fmt::format("reference error is {} for {}/{}", it->second->value, to_string(c.scenario),
                                    to_string(c.scale)));
        }
        const double s = 1.0 - c.value / it->second->value;
        row.cells.push_back({c.scenario, c.scale, s});
        seen.insert({c.scenario, c.scale});
        total += s;
    }
    for (const auto& [key, c] : ref) {
        if (!seen.contains(key)) row.missing.push_back(key);
    }
    row.overall = row.cells.empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : total / static_cast<double>(row.cells.size());
    return row;
}

std::vector<std::pair<double, double>> cdf_export(std::span<const DomainError> errors) {
    if (errors.empty()) throw Error(ErrorCode::EmptySet, "no domain errors for a CDF");
    std::vector<double> v;
    for (const auto& e : errors) v.push_back(e.rmse);
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
        out.emplace_back(v[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

std::vector<AlignedSeries> align(const Dataset& ds, const ScenarioSplit& split, const PredictionSet& predictions,
                                 Target target) {
    std::vector<AlignedSeries> out;
    for (const auto& domain : split.test) {
        const auto* site = ds.find(domain.site);
        if (!site) continue;
        AlignedSeries s{domain, {}};
        for (const auto& r : site->records) {
            if (domain.year && r.time.year() != *domain.year) continue;
            const double* p = predictions.find(domain.site, r.time);
            s.points.push_back({r.time, r.targets.get(target),
                                p ? *p : std::numeric_limits<double>::quiet_NaN(), r.valid()});
        }
        out.push_back(std::move(s));
    }
    return out;
}

const MetricCell* MetricTable::find(ScenarioKind scenario, Scale scale, std::string_view model,
                                    Statistic stat) const {
    for (const auto& c : cells) {
        if (c.scenario == scenario && c.scale == scale && c.model == model && c.statistic == stat) return &c;
    }
    return nullptr;
}

MetricTable build_report(const Dataset& ds, std::span<const ScenarioPredictions> inputs,
                         const ReportOptions& options) {
    MetricTable table;
    table.target = options.target;
    table.scales = options.scales;
    table.statistics = options.statistics;
    table.reference = options.reference;
    std::set<std::string> models;
    bool any_coverage = false;

    for (const auto& input : inputs) {
        const auto kind = input.split.kind;
        table.scenarios.push_back(kind);
        std::vector<const PredictionSet*> sets;
        for (const auto& p : input.predictions) sets.push_back(&p);
        std::sort(sets.begin(), sets.end(),
                  [](const PredictionSet* a, const PredictionSet* b) { return a->model_name < b->model_name; });
        for (const auto* set : sets) {
            models.insert(set->model_name);
            auto series = align(ds, input.split, *set, options.target);
            const std::size_t n_domains = series.size();
            std::erase_if(series, [](const AlignedSeries& s) {
                return std::none_of(s.points.begin(), s.points.end(),
                                    [](const AlignedPoint& p) { return std::isfinite(p.prediction); });
            });
            if (series.empty()) {
                table.flags.push_back(fmt::format("absent: model {} covers no test domain of scenario {}",
                                                  set->model_name, to_string(kind)));
                continue;
            }
            any_coverage = true;
            for (const auto scale : options.scales) {
                const auto aggregated = aggregate_for_scenario(series, kind, scale, options.rules);
                std::vector<DomainError> errors;
                for (const auto& a : aggregated) errors.push_back(domain_rmse(a, kind, set->model_name));
                table.counts.push_back({kind, scale, set->model_name, n_domains, series.size(), errors.size()});
                if (errors.empty()) {
                    table.flags.push_back(fmt::format("absent: {}/{}/{} has no scored domain", to_string(kind),
                                                      to_string(scale), set->model_name));
                    continue;
                }
                for (const auto stat : options.statistics) {
                    auto cell = summarize(errors, stat);
                    if (cell.low_support && stat == options.statistics.front()) {
                        table.flags.push_back(fmt::format("low-support: {}/{}/{} has {} domains", to_string(kind),
                                                          to_string(scale), set->model_name, cell.n_domains));
                    }
                    table.cells.push_back(std::move(cell));
                }
                table.errors.insert(table.errors.end(), errors.begin(), errors.end());
            }
        }
    }
    if (!any_coverage) throw Error(ErrorCode::NoCoverage, "no prediction set covers any test domain");
    table.models.assign(models.begin(), models.end());
    if (!models.contains(options.reference)) {
        throw Error(ErrorCode::ZeroReference, fmt::format("reference model '{}' has no predictions", options.reference));
    }
    for (const auto stat : options.statistics) {
        std::vector<MetricCell> ref;
        for (const auto& c : table.cells) {
            if (c.model == options.reference && c.statistic == stat) ref.push_back(c);
        }
        for (const auto& m : table.models) {
            std::vector<MetricCell> mine;
            for (const auto& c : table.cells) {
                if (c.model == m && c.statistic == stat) mine.push_back(c);
            }
            auto row = skill(mine, ref);
            row.model = m;
            row.statistic = stat;
            for (const auto& [scenario, scale] : row.missing) {
                table.flags.push_back(fmt::format("skill: {} ({}) lacks {}/{}; overall averages present cells only",
                                                  m, to_string(stat), to_string(scenario), to_string(scale)));
            }
            table.skills.push_back(std::move(row));
        }
    }
    return table;
}

namespace {
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

nlohmann::json to_json(const MetricTable& t) {
    nlohmann::json j;
    j["target"] = to_string(t.target);
    j["reference"] = t.reference;
    j["models"] = t.models;
    auto names = [](const auto& v) {
        auto arr = nlohmann::json::array();
        for (const auto& x : v) arr.push_back(to_string(x));
        return arr;
    };
    j["scenarios"] = names(t.scenarios);
    j["scales"] = names(t.scales);
    j["statistics"] = names(t.statistics);
    auto cells = nlohmann::json::array();
    for (const auto& c : t.cells) {
        cells.push_back({{"scenario", to_string(c.scenario)},
                         {"scale", to_string(c.scale)},
                         {"model", c.model},
                         {"statistic", to_string(c.statistic)},
                         {"value", c.value},
                         {"n_domains", c.n_domains},
                         {"low_support", c.low_support}});
    }
    j["cells"] = cells;
    auto skills = nlohmann::json::array();
    for (const auto& s : t.skills) {
        auto sc = nlohmann::json::array();
        for (const auto& c : s.cells) {
            sc.push_back({{"scenario", to_string(c.scenario)}, {"scale", to_string(c.scale)}, {"skill", c.skill}});
        }
        auto missing = nlohmann::json::array();
        for (const auto& [scenario, scale] : s.missing) {
            missing.push_back({{"scenario", to_string(scenario)}, {"scale", to_string(scale)}});
        }
        skills.push_back({{"model", s.model},
                          {"statistic", to_string(s.statistic)},
                          {"overall", number_or_null(s.overall)},
                          {"cells", sc},
                          {"missing", missing}});
    }
    j["skills"] = skills;
    auto counts = nlohmann::json::array();
    for (const auto& c : t.counts) {
        counts.push_back({{"scenario", to_string(c.scenario)},
                          {"scale", to_string(c.scale)},
                          {"model", c.model},
                          {"test_domains", c.test_domains},
                          {"covered_domains", c.covered_domains},
                          {"scored_domains", c.scored_domains}});
    }
    j["counts"] = counts;
    j["flags"] = t.flags;
    return j;
}

std::string table_csv(const MetricTable& t, Statistic statistic, double display_scale) {
    std::string out = "model";
    for (auto scenario : t.scenarios) {
        for (auto scale : t.scales) out += fmt::format(",{}/{}", to_string(scenario), to_string(scale));
    }
    out += ",skill\n";
    for (const auto& m : t.models) {
        out += m;
        for (auto scenario : t.scenarios) {
            for (auto scale : t.scales) {
                const auto* c = t.find(scenario, scale, m, statistic);
                out += c ? fmt::format(",{}", c->value * display_scale) : std::string(",NA");
            }
        }
        const SkillRow* row = nullptr;
        for (const auto& s : t.skills) {
            if (s.model == m && s.statistic == statistic) row = &s;
        }
        out += row && std::isfinite(row->overall) ? fmt::format(",{}\n", row->overall) : std::string(",NA\n");
    }
    return out;
}

std::string cdf_csv(std::span<const std::pair<double, double>> cdf) {
    std::string out = "rmse,cdf\n";
    for (const auto& [x, f] : cdf) out += fmt::format("{},{}\n", x, f);
    return out;
}

}  // namespace fluxbench
