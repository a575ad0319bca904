#include "fluxbench/shiftdiag.hpp"

#include "fluxbench/error.hpp"
#include "fluxbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

namespace fluxbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed streams; each diagnostic draws its repeat splits from its own stream.
constexpr std::uint64_t kStreamCovariate = 10;
constexpr std::uint64_t kStreamTrainMarginal = 11;
constexpr std::uint64_t kStreamShared = 12;
constexpr std::uint64_t kStreamCurve = 13;
constexpr std::uint64_t kStreamModelCurve = 14;

void require_size(std::size_t n, std::size_t min, std::string_view what) {
    if (n < min) throw Error(ErrorCode::PoolTooSmall, fmt::format("{} has {} rows, need >= {}", what, n, min));
}

std::vector<double> column(const Matrix& x, std::size_t c) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = x(r, c);
    return out;
}

std::size_t covariate_column(std::string_view name) {
    const auto idx = continuous_index(name);
    if (!idx) throw Error(ErrorCode::InvalidConfig, fmt::format("unknown covariate '{}'", name));
    return *idx;
}

}  // namespace

PooledSample PooledSample::select(std::span<const std::size_t> idx) const {
    PooledSample out{x.select_rows(idx), {}, origin};
    out.y.reserve(idx.size());
    for (auto i : idx) out.y.push_back(y[i]);
    return out;
}

PooledSample make_pool(const Dataset& ds, std::span<const DomainKey> domains, Target target, Origin origin) {
    auto rows = make_rows(ds, domains, target);
    return {std::move(rows.x), std::move(rows.y), origin};
}

void WeightSpec::validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw Error(ErrorCode::InvalidConfig, "epsilon must be in (0, 0.5)");
    if (!(clip_quantile > 0.0 && clip_quantile <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "clip_quantile must be in (0, 1]");
    }
}

MeanSd mean_sd(std::span<const double> values) {
    MeanSd out;
    if (values.empty()) return {kNaN, kNaN};
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

DiagnosticConfig::DiagnosticConfig() {
    classifier.n_trees = 400;
    classifier.max_depth = 6;
    classifier.learning_rate = 0.05;
    classifier.subsample_rows = 0.8;
    classifier.subsample_cols = 1.0;
    classifier.early_stopping_rounds = 50;
    classifier.loss = Loss::Logistic;
    regressor = classifier;
    regressor.loss = Loss::Squared;
}

GbtModel fit_with_holdout(const Rows& rows, GbtConfig cfg, double holdout_fraction, std::uint64_t seed) {
    cfg.seed = derive_seed(seed, 1, 0);
    const std::size_t n = rows.size();
    const auto n_hold = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
    if (n_hold == 0 || n - n_hold < 2) return fit_gbt(rows, cfg);
    SplitMix64 rng(derive_seed(seed, 0, 0));
    auto perm = permutation(n, rng);
    std::vector<std::size_t> hold(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
    std::vector<std::size_t> fit(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
    std::sort(hold.begin(), hold.end());
    std::sort(fit.begin(), fit.end());
    const auto fit_rows = rows.select(fit);
    const auto hold_rows = rows.select(hold);
    return fit_gbt(fit_rows, cfg, &hold_rows);
}

Rows domain_rows(const Matrix& train_x, const Matrix& test_x) {
    Rows out{Matrix(0, train_x.cols()), {}};
    for (std::size_t r = 0; r < train_x.rows(); ++r) {
        out.x.append_row(train_x.row(r));
        out.y.push_back(0.0);
    }
    for (std::size_t r = 0; r < test_x.rows(); ++r) {
        out.x.append_row(test_x.row(r));
        out.y.push_back(1.0);
    }
    return out;
}

double balanced_accuracy(std::span<const double> scores, std::span<const double> labels, double threshold) {
    std::size_t tp = 0, pos = 0, tn = 0, neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted_test = scores[i] >= threshold;
        if (labels[i] == 1.0) {
            ++pos;
            tp += predicted_test ? 1 : 0;
        } else {
            ++neg;
            tn += predicted_test ? 0 : 1;
        }
    }
    const double tpr = pos ? static_cast<double>(tp) / static_cast<double>(pos) : kNaN;
    const double tnr = neg ? static_cast<double>(tn) / static_cast<double>(neg) : kNaN;
    return 0.5 * (tpr + tnr);
}

CovariateShiftResult covariate_shift_score(const PooledSample& train, const PooledSample& test, std::uint64_t seed,
                                           const DiagnosticConfig& cfg) {
    require_size(train.size(), cfg.min_pool_rows, "train pool");
    require_size(test.size(), cfg.min_pool_rows, "test pool");
    if (cfg.n_repeats < 1) throw Error(ErrorCode::InvalidConfig, "n_repeats must be >= 1");
    std::vector<double> scores(static_cast<std::size_t>(cfg.n_repeats));
    const auto repeats = static_cast<std::ptrdiff_t>(cfg.n_repeats);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < repeats; ++r) {
        const auto rep = static_cast<std::uint64_t>(r);
        SplitMix64 rng(derive_seed(seed, kStreamCovariate, rep));
        const auto tr = random_parts(train.size(), 2, rng);
        const auto te = random_parts(test.size(), 2, rng);
        const auto fit = domain_rows(train.x.select_rows(tr[0]), test.x.select_rows(te[0]));
        const auto eval = domain_rows(train.x.select_rows(tr[1]), test.x.select_rows(te[1]));
        const auto clf = fit_with_holdout(fit, cfg.classifier, cfg.holdout_fraction,
                                          derive_seed(seed, kStreamCovariate + 100, rep));
        scores[static_cast<std::size_t>(r)] = balanced_accuracy(clf.predict(eval.x), eval.y);
    }
    return {mean_sd(scores), scores};
}

std::vector<double> clip_weights(std::span<const double> weights, double clip_quantile) {
    std::vector<double> nonzero;
    for (double w : weights) {
        if (w > 0.0) nonzero.push_back(w);
    }
    std::vector<double> out(weights.begin(), weights.end());
    if (nonzero.empty()) return out;
    std::sort(nonzero.begin(), nonzero.end());
    const auto n = nonzero.size();
    auto rank = static_cast<std::size_t>(std::ceil(clip_quantile * static_cast<double>(n) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, n);
    const double cap = nonzero[rank - 1];
    for (auto& w : out) w = std::min(w, cap);
    return out;
}

std::vector<double> test_weights(std::span<const double> scores, const WeightSpec& spec) {
    std::vector<double> w(scores.size(), 0.0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = scores[i];
        if (s < 1.0 - spec.epsilon && s > 0.0) w[i] = (1.0 - s) / s;
    }
    return clip_weights(w, spec.clip_quantile);
}

std::vector<bool> train_retained(std::span<const double> scores, double epsilon) {
    std::vector<bool> keep(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) keep[i] = scores[i] > epsilon;
    return keep;
}

std::vector<double> shared_weights(std::span<const double> scores, Origin origin, double alpha,
                                   const WeightSpec& spec) {
    std::vector<double> w(scores.size(), 0.0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = scores[i];
        if (origin == Origin::Train) {
            if (s > spec.epsilon) w[i] = s / alpha;
        } else if (s < 1.0 - spec.epsilon) {
            w[i] = (1.0 - s) / (1.0 - alpha);
        }
    }
    return clip_weights(w, spec.clip_quantile);
}

std::vector<double> importance_weights(const Predictor& classifier, const Matrix& x, Origin origin,
                                       const WeightSpec& spec) {
    const auto s = classifier.predict(x);
    if (origin == Origin::Test) return test_weights(s, spec);
    const auto keep = train_retained(s, spec.epsilon);
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = keep[i] ? 1.0 : 0.0;
    return w;
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
    double first = 0.0;
    bool any = false, equal = true;
    for (double w : weights) {
        if (w <= 0.0) continue;
        if (!any) first = w;
        else if (w != first) equal = false;
        any = true;
    }
    if (!any) return kNaN;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        const double w = equal ? 1.0 : weights[i];
        num += w * values[i];
        den += w;
    }
    return num / den;
}

double weighted_rmse(std::span<const double> prediction, std::span<const double> truth,
                     std::span<const double> weights) {
    std::vector<double> sq(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) sq[i] = (prediction[i] - truth[i]) * (prediction[i] - truth[i]);
    return std::sqrt(weighted_mean(sq, weights));
}

namespace {

struct RepeatParts {
    PooledSample weight_train, model_train, held_train;
    PooledSample weight_test, eval_test;
};

RepeatParts split_for_repeat(const PooledSample& train, const PooledSample& test, SplitMix64& rng) {
    const auto tr = random_parts(train.size(), 3, rng);
    const auto te = random_parts(test.size(), 2, rng);
    return {train.select(tr[0]), train.select(tr[1]), train.select(tr[2]), test.select(te[0]), test.select(te[1])};
}

struct ConditionalRepeat {
    double percent = 0.0;
    RetainedFraction retained;
    double alpha = 0.0;
};

template <typename RepeatFn>
ConditionalShiftResult run_conditional(const PooledSample& train, const PooledSample& test, const DiagnosticConfig& cfg,
                                       RepeatFn&& repeat) {
    require_size(train.size(), 3 * cfg.min_part_rows, "train pool");
    require_size(test.size(), 2 * cfg.min_part_rows, "test pool");
    if (cfg.n_repeats < 1) throw Error(ErrorCode::InvalidConfig, "n_repeats must be >= 1");
    const auto n = static_cast<std::size_t>(cfg.n_repeats);
    std::vector<ConditionalRepeat> results(n);
    std::vector<std::optional<Error>> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n); ++r) {
        try {
            results[static_cast<std::size_t>(r)] = repeat(static_cast<std::uint64_t>(r));
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(r)] = e;
        }
    }
    for (const auto& e : errors) {
        if (e) throw *e;
    }
    ConditionalShiftResult out;
    for (const auto& r : results) {
        out.per_repeat.push_back(r.percent);
        out.retained.push_back(r.retained);
        out.alpha = r.alpha;
    }
    out.percent_increase = mean_sd(out.per_repeat);
    return out;
}

double retained_share(std::span<const double> w) {
    if (w.empty()) return 0.0;
    return static_cast<double>(std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; })) /
           static_cast<double>(w.size());
}

}  // namespace

ConditionalShiftResult conditional_shift_train_marginal(const PooledSample& train, const PooledSample& test,
                                                        std::uint64_t seed, const DiagnosticConfig& cfg) {
    cfg.weights.validate();
    return run_conditional(train, test, cfg, [&](std::uint64_t rep) {
        SplitMix64 rng(derive_seed(seed, kStreamTrainMarginal, rep));
        const auto parts = split_for_repeat(train, test, rng);
        const auto clf = fit_with_holdout(domain_rows(parts.weight_train.x, parts.weight_test.x), cfg.classifier,
                                          cfg.holdout_fraction, derive_seed(seed, kStreamTrainMarginal + 100, rep));
        const auto reg = fit_with_holdout(Rows{parts.model_train.x, parts.model_train.y}, cfg.regressor,
                                          cfg.holdout_fraction, derive_seed(seed, kStreamTrainMarginal + 200, rep));
        const auto w_train = importance_weights(clf, parts.held_train.x, Origin::Train, cfg.weights);
        const auto w_test = importance_weights(clf, parts.eval_test.x, Origin::Test, cfg.weights);
        if (retained_share(w_test) == 0.0) throw Error(ErrorCode::AllTrimmed, "no test row survived trimming");
        if (retained_share(w_train) == 0.0) throw Error(ErrorCode::AllTrimmed, "no held-out train row survived trimming");
        const double rmse_train = weighted_rmse(reg.predict(parts.held_train.x), parts.held_train.y, w_train);
        const double rmse_test = weighted_rmse(reg.predict(parts.eval_test.x), parts.eval_test.y, w_test);
        return ConditionalRepeat{100.0 * (rmse_test / rmse_train - 1.0),
                                 {retained_share(w_train), retained_share(w_test)}, 0.0};
    });
}

ConditionalShiftResult conditional_shift_shared(const PooledSample& train, const PooledSample& test,
                                                std::uint64_t seed, const DiagnosticConfig& cfg) {
    cfg.weights.validate();
    return run_conditional(train, test, cfg, [&](std::uint64_t rep) {
        SplitMix64 rng(derive_seed(seed, kStreamShared, rep));
        const auto parts = split_for_repeat(train, test, rng);
        const double alpha = static_cast<double>(parts.weight_test.size()) /
                             static_cast<double>(parts.weight_train.size() + parts.weight_test.size());
        const auto clf = fit_with_holdout(domain_rows(parts.weight_train.x, parts.weight_test.x), cfg.classifier,
                                          cfg.holdout_fraction, derive_seed(seed, kStreamShared + 100, rep));
        const auto reg = fit_with_holdout(Rows{parts.model_train.x, parts.model_train.y}, cfg.regressor,
                                          cfg.holdout_fraction, derive_seed(seed, kStreamShared + 200, rep));
        const auto w_train = shared_weights(clf.predict(parts.held_train.x), Origin::Train, alpha, cfg.weights);
        const auto w_test = shared_weights(clf.predict(parts.eval_test.x), Origin::Test, alpha, cfg.weights);
        if (retained_share(w_test) == 0.0 || retained_share(w_train) == 0.0) {
            throw Error(ErrorCode::AllTrimmed, "no row survived trimming");
        }
        const double rmse_train = weighted_rmse(reg.predict(parts.held_train.x), parts.held_train.y, w_train);
        const double rmse_test = weighted_rmse(reg.predict(parts.eval_test.x), parts.eval_test.y, w_test);
        return ConditionalRepeat{100.0 * (rmse_test / rmse_train - 1.0),
                                 {retained_share(w_train), retained_share(w_test)}, alpha};
    });
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::EmptySet, "percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);  // 0-based rank
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> common_support(std::span<const double> a, std::span<const double> b, double lo_pct,
                                         double hi_pct) {
    std::vector<double> va(a.begin(), a.end()), vb(b.begin(), b.end());
    if (va.empty() || vb.empty()) throw Error(ErrorCode::EmptySupport, "empty pool");
    const double lo = std::max(percentile(va, lo_pct / 100.0), percentile(vb, lo_pct / 100.0));
    const double hi = std::min(percentile(va, hi_pct / 100.0), percentile(vb, hi_pct / 100.0));
    if (!(lo < hi)) {
        throw Error(ErrorCode::EmptySupport, fmt::format("percentile intervals do not overlap ({} >= {})", lo, hi));
    }
    return {lo, hi};
}

RelationshipCurve bin_means(std::string covariate, std::vector<double> edges, std::span<const double> train_cov,
                            std::span<const double> train_values, std::span<const double> train_weights,
                            std::span<const double> test_cov, std::span<const double> test_values,
                            std::span<const double> test_weights) {
    const std::size_t n_bins = edges.size() - 1;
    const double lo = edges.front(), hi = edges.back();
    auto bin_of = [&](double x) -> std::optional<std::size_t> {
        if (!(x >= lo && x <= hi)) return std::nullopt;
        auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(n_bins));
        return std::min(b, n_bins - 1);
    };
    std::vector<std::vector<double>> tv(n_bins), tw(n_bins), sv(n_bins), sw(n_bins);
    for (std::size_t i = 0; i < train_cov.size(); ++i) {
        if (train_weights[i] <= 0.0) continue;
        if (auto b = bin_of(train_cov[i])) {
            tv[*b].push_back(train_values[i]);
            tw[*b].push_back(1.0);
        }
    }
    for (std::size_t i = 0; i < test_cov.size(); ++i) {
        if (test_weights[i] <= 0.0) continue;
        if (auto b = bin_of(test_cov[i])) {
            sv[*b].push_back(test_values[i]);
            sw[*b].push_back(test_weights[i]);
        }
    }
    RelationshipCurve curve;
    curve.covariate = std::move(covariate);
    curve.edges = std::move(edges);
    for (std::size_t b = 0; b < n_bins; ++b) {
        curve.train_counts.push_back(tv[b].size());
        curve.test_counts.push_back(sv[b].size());
        const bool defined = !tv[b].empty() && !sv[b].empty();
        curve.train_means.push_back(defined ? weighted_mean(tv[b], tw[b]) : kNaN);
        curve.test_weighted_means.push_back(defined ? weighted_mean(sv[b], sw[b]) : kNaN);
    }
    return curve;
}

namespace {

std::vector<double> equal_edges(double lo, double hi, std::size_t n_bins) {
    std::vector<double> edges(n_bins + 1);
    for (std::size_t k = 0; k <= n_bins; ++k) {
        edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_bins);
    }
    edges.back() = hi;
    return edges;
}

}  // namespace

RelationshipCurve binned_curve(const PooledSample& train, const PooledSample& test, std::string_view covariate,
                               const DiagnosticConfig& cfg, const CurveOptions& opt) {
    cfg.weights.validate();
    const auto c = covariate_column(covariate);
    const auto train_cov = column(train.x, c);
    const auto test_cov = column(test.x, c);
    const auto [lo, hi] = common_support(train_cov, test_cov, opt.lo_pct, opt.hi_pct);
    require_size(train.size(), cfg.min_pool_rows, "train pool");
    require_size(test.size(), cfg.min_pool_rows, "test pool");

    const auto clf = fit_with_holdout(domain_rows(train.x.drop_column(c), test.x.drop_column(c)), cfg.classifier,
                                      cfg.holdout_fraction, derive_seed(opt.seed, kStreamCurve, 0));
    const auto w_train = importance_weights(clf, train.x.drop_column(c), Origin::Train, cfg.weights);
    const auto w_test = importance_weights(clf, test.x.drop_column(c), Origin::Test, cfg.weights);
    return bin_means(std::string(covariate), equal_edges(lo, hi, opt.n_bins), train_cov, train.y, w_train, test_cov,
                     test.y, w_test);
}

RelationshipCurve model_based_curve(const PooledSample& train, const PooledSample& test, std::string_view covariate,
                                    const DiagnosticConfig& cfg, const CurveOptions& opt) {
    cfg.weights.validate();
    const auto c = covariate_column(covariate);
    require_size(train.size(), 3 * cfg.min_part_rows, "train pool");
    require_size(test.size(), 3 * cfg.min_part_rows, "test pool");
    SplitMix64 rng(derive_seed(opt.seed, kStreamModelCurve, 0));
    const auto tr = random_parts(train.size(), 3, rng);
    const auto te = random_parts(test.size(), 3, rng);
    const auto fit_tr = train.select(tr[0]), eval_tr = train.select(tr[1]), clf_tr = train.select(tr[2]);
    const auto fit_te = test.select(te[0]), eval_te = test.select(te[1]), clf_te = test.select(te[2]);

    const auto eval_tr_cov = column(eval_tr.x, c);
    const auto eval_te_cov = column(eval_te.x, c);
    const auto [lo, hi] = common_support(eval_tr_cov, eval_te_cov, opt.lo_pct, opt.hi_pct);

    const auto f_train = fit_with_holdout(Rows{fit_tr.x, fit_tr.y}, cfg.regressor, cfg.holdout_fraction,
                                          derive_seed(opt.seed, kStreamModelCurve + 100, 0));
    const auto f_test = fit_with_holdout(Rows{fit_te.x, fit_te.y}, cfg.regressor, cfg.holdout_fraction,
                                         derive_seed(opt.seed, kStreamModelCurve + 200, 0));
    const auto clf = fit_with_holdout(domain_rows(clf_tr.x.drop_column(c), clf_te.x.drop_column(c)), cfg.classifier,
                                      cfg.holdout_fraction, derive_seed(opt.seed, kStreamModelCurve + 300, 0));
    const auto w_train = importance_weights(clf, eval_tr.x.drop_column(c), Origin::Train, cfg.weights);
    const auto w_test = importance_weights(clf, eval_te.x.drop_column(c), Origin::Test, cfg.weights);
    return bin_means(std::string(covariate), equal_edges(lo, hi, opt.n_bins), eval_tr_cov, f_train.predict(eval_tr.x),
                     w_train, eval_te_cov, f_test.predict(eval_te.x), w_test);
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json series(std::span<const double> v) {
    auto arr = nlohmann::json::array();
    for (double x : v) arr.push_back(number_or_null(x));
    return arr;
}

nlohmann::json to_json(const ConditionalShiftResult& r) {
    auto retained = nlohmann::json::array();
    for (const auto& f : r.retained) retained.push_back({{"train", f.train}, {"test", f.test}});
    return {{"mean", number_or_null(r.percent_increase.mean)},
            {"sd", number_or_null(r.percent_increase.sd)},
            {"per_repeat", series(r.per_repeat)},
            {"retained_fractions", retained}};
}

}  // namespace

nlohmann::json to_json(const ShiftReport& report) {
    nlohmann::json j;
    j["scenario"] = report.scenario;
    j["target"] = report.target;
    j["seed"] = report.seed;
    j["n_repeats"] = report.n_repeats;
    j["balanced_accuracy"] = {{"mean", number_or_null(report.covariate.balanced_accuracy.mean)},
                              {"sd", number_or_null(report.covariate.balanced_accuracy.sd)},
                              {"per_repeat", series(report.covariate.per_repeat)}};
    j["conditional_increase_train_marginal"] = report.train_marginal ? to_json(*report.train_marginal) : nlohmann::json(nullptr);
    if (report.shared) {
        auto s = to_json(*report.shared);
        s["alpha"] = report.shared->alpha;
        j["conditional_increase_shared"] = s;
    } else {
        j["conditional_increase_shared"] = nullptr;
    }
    j["notes"] = report.notes;
    return j;
}

nlohmann::json to_json(const RelationshipCurve& curve) {
    return {{"covariate", curve.covariate},
            {"bin_edges", curve.edges},
            {"train_means", series(curve.train_means)},
            {"test_weighted_means", series(curve.test_weighted_means)},
            {"train_counts", curve.train_counts},
            {"test_counts", curve.test_counts}};
}

std::string curve_plot_data(const RelationshipCurve& curve, bool test_series) {
    std::string out = "bin_center,value\n";
    const auto& values = test_series ? curve.test_weighted_means : curve.train_means;
    for (std::size_t b = 0; b < values.size(); ++b) {
        const double center = 0.5 * (curve.edges[b] + curve.edges[b + 1]);
        out += fmt::format("{},{}\n", center, std::isfinite(values[b]) ? fmt::format("{}", values[b]) : "NaN");
    }
    return out;
}

}  // namespace fluxbench
