#include "fluxbench/gbt.hpp"

#include "fluxbench/error.hpp"
#include "fluxbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

namespace fluxbench {

std::string_view to_string(Loss loss) { return loss == Loss::Squared ? "squared" : "logistic"; }

double sigmoid(double margin) {
    if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
    const double e = std::exp(margin);
    return e / (1.0 + e);
}

void GbtConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (n_trees < 1) bad(fmt::format("n_trees must be >= 1 (got {})", n_trees));
    if (max_depth < 1) bad(fmt::format("max_depth must be >= 1 (got {})", max_depth));
    if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
    if (!(subsample_rows > 0.0 && subsample_rows <= 1.0)) bad("subsample_rows must be in (0, 1]");
    if (!(subsample_cols > 0.0 && subsample_cols <= 1.0)) bad("subsample_cols must be in (0, 1]");
    if (early_stopping_rounds < 0) bad("early_stopping_rounds must be >= 0");
    if (max_bins == 1) bad("max_bins must be 0 (exact) or >= 2");
    if (!(min_child_weight >= 0.0)) bad("min_child_weight must be >= 0");
}

nlohmann::json to_json(const GbtConfig& cfg) {
    return {{"n_trees", cfg.n_trees},
            {"max_depth", cfg.max_depth},
            {"learning_rate", cfg.learning_rate},
            {"subsample_rows", cfg.subsample_rows},
            {"subsample_cols", cfg.subsample_cols},
            {"loss", to_string(cfg.loss)},
            {"early_stopping_rounds", cfg.early_stopping_rounds},
            {"seed", cfg.seed},
            {"max_bins", cfg.max_bins},
            {"min_child_weight", cfg.min_child_weight}};
}

GbtModel::GbtModel(Loss loss, double base_score, std::size_t n_features, std::vector<gbt::Tree> trees)
    : loss_(loss), base_score_(base_score), n_features_(n_features), trees_(std::move(trees)) {}

double GbtModel::predict(std::span<const double> x) const {
    double margin = base_score_;
    for (const auto& t : trees_) margin += t.predict(x);
    return loss_ == Loss::Logistic ? sigmoid(margin) : margin;
}

std::vector<double> GbtModel::predict_margin(const Matrix& x) const {
    std::vector<double> out(x.rows(), base_score_);
    gbt::accumulate_predictions(trees_, x, out);
    return out;
}

std::vector<double> GbtModel::predict(const Matrix& x) const {
    auto out = predict_margin(x);
    if (loss_ == Loss::Logistic) {
        for (auto& v : out) v = sigmoid(v);
    }
    return out;
}

nlohmann::json GbtModel::to_json() const {
    auto trees = nlohmann::json::array();
    for (const auto& t : trees_) {
        std::vector<int> feature, left, right;
        std::vector<double> threshold, value;
        for (const auto& n : t.nodes) {
            feature.push_back(n.feature);
            left.push_back(n.left);
            right.push_back(n.right);
            threshold.push_back(n.threshold);
            value.push_back(n.value);
        }
        trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                         {"value", value}});
    }
    return {{"format", "fluxbench-model"},
            {"version", 1},
            {"kind", "gbt"},
            {"loss", to_string(loss_)},
            {"base_score", base_score_},
            {"n_features", n_features_},
            {"best_iteration", best_iteration},
            {"trees", trees}};
}

GbtModel GbtModel::from_json(const nlohmann::json& j) {
    std::vector<gbt::Tree> trees;
    for (const auto& jt : j.at("trees")) {
        const auto feature = jt.at("feature").get<std::vector<int>>();
        const auto threshold = jt.at("threshold").get<std::vector<double>>();
        const auto left = jt.at("left").get<std::vector<int>>();
        const auto right = jt.at("right").get<std::vector<int>>();
        const auto value = jt.at("value").get<std::vector<double>>();
        gbt::Tree t;
        for (std::size_t i = 0; i < feature.size(); ++i) {
            gbt::Tree::Node n;
            n.feature = feature[i];
            n.threshold = threshold[i];
            n.left = left[i];
            n.right = right[i];
            n.value = value[i];
            t.nodes.push_back(n);
        }
        trees.push_back(std::move(t));
    }
    const Loss loss = j.at("loss").get<std::string>() == "logistic" ? Loss::Logistic : Loss::Squared;
    GbtModel m(loss, j.at("base_score").get<double>(), j.at("n_features").get<std::size_t>(), std::move(trees));
    m.best_iteration = j.value("best_iteration", -1);
    return m;
}

namespace {

struct SplitChoice {
    double gain = 0.0;
    std::int32_t feature = -1;
    std::uint16_t bin = 0;
};

class TreeGrower {
public:
    TreeGrower(const gbt::BinnedMatrix& bins, const gbt::FeatureCuts& cuts, std::span<const double> grad,
               std::span<const double> hess, std::vector<std::uint32_t> features, const GbtConfig& cfg)
        : bins_(bins), cuts_(cuts), grad_(grad), hess_(hess), features_(std::move(features)), cfg_(cfg) {}

    gbt::Tree grow(std::vector<std::uint32_t>& rows) {
        gbt::Tree tree;
        gbt::HistogramSet hist(cuts_);
        gbt::build_histograms(bins_, rows, grad_, hess_, features_, hist);
        grow_node(tree, rows, 0, rows.size(), hist, 0);
        return tree;
    }

private:
    SplitChoice best_split(const gbt::HistogramSet& hist, double g_total, double h_total) const {
        SplitChoice best;
        const double parent_score = g_total * g_total / h_total;
        for (auto f : features_) {
            const auto h = hist.feature(f);
            double gl = 0.0, hl = 0.0;
            for (std::size_t b = 0; b + 1 < h.size(); ++b) {
                gl += h[b].grad;
                hl += h[b].hess;
                const double gr = g_total - gl;
                const double hr = h_total - hl;
                if (h[b].count == 0 && b > 0) continue;
                if (hl < cfg_.min_child_weight || hr < cfg_.min_child_weight || hl <= 0.0 || hr <= 0.0) continue;
                const double gain = gl * gl / hl + gr * gr / hr - parent_score;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<std::int32_t>(f);
                    best.bin = static_cast<std::uint16_t>(b);
                }
            }
        }
        return best;
    }

    std::int32_t grow_node(gbt::Tree& tree, std::vector<std::uint32_t>& rows, std::size_t begin, std::size_t end,
                           const gbt::HistogramSet& hist, int depth) {
        const auto idx = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        double g_total = 0.0, h_total = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            g_total += grad_[rows[i]];
            h_total += hess_[rows[i]];
        }
        const double leaf = h_total > 0.0 ? -g_total / h_total * cfg_.learning_rate : 0.0;
        if (depth >= cfg_.max_depth || end - begin < 2 || h_total <= 0.0) {
            tree.nodes[static_cast<std::size_t>(idx)].value = leaf;
            return idx;
        }
        const auto split = best_split(hist, g_total, h_total);
        if (split.feature < 0) {
            tree.nodes[static_cast<std::size_t>(idx)].value = leaf;
            return idx;
        }
        const auto col = bins_.column(static_cast<std::size_t>(split.feature));
        const auto mid_it = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                                  rows.begin() + static_cast<std::ptrdiff_t>(end),
                                                  [&](std::uint32_t r) { return col[r] <= split.bin; });
        const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

        // Build the smaller child's histogram directly; derive the other by subtraction.
        gbt::HistogramSet left_hist(cuts_), right_hist(cuts_);
        const std::span<const std::uint32_t> all(rows);
        if (mid - begin <= end - mid) {
            gbt::build_histograms(bins_, all.subspan(begin, mid - begin), grad_, hess_, features_, left_hist);
            right_hist.subtract(hist, left_hist, features_);
        } else {
            gbt::build_histograms(bins_, all.subspan(mid, end - mid), grad_, hess_, features_, right_hist);
            left_hist.subtract(hist, right_hist, features_);
        }

        auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        node.feature = split.feature;
        node.split_bin = split.bin;
        node.threshold = cuts_.cuts[static_cast<std::size_t>(split.feature)][split.bin];
        node.value = leaf;
        const auto left = grow_node(tree, rows, begin, mid, left_hist, depth + 1);
        const auto right = grow_node(tree, rows, mid, end, right_hist, depth + 1);
        tree.nodes[static_cast<std::size_t>(idx)].left = left;
        tree.nodes[static_cast<std::size_t>(idx)].right = right;
        return idx;
    }

    const gbt::BinnedMatrix& bins_;
    const gbt::FeatureCuts& cuts_;
    std::span<const double> grad_;
    std::span<const double> hess_;
    std::vector<std::uint32_t> features_;
    const GbtConfig& cfg_;
};

double mean_loss(Loss loss, std::span<const double> margin, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (loss == Loss::Squared) {
            const double d = margin[i] - y[i];
            acc += d * d;
        } else {
            // log(1 + e^m) - y m, computed stably
            const double m = margin[i];
            acc += (m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m))) - y[i] * m;
        }
    }
    return y.empty() ? 0.0 : acc / static_cast<double>(y.size());
}

std::vector<std::uint32_t> sample_indices(std::size_t n, double fraction, std::uint64_t seed) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    if (fraction >= 1.0) return idx;
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    SplitMix64 rng(seed);
    partial_shuffle(idx, m, rng);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

GbtModel fit_gbt(const Rows& train, const GbtConfig& cfg, const Rows* validation) {
    cfg.validate();
    const std::size_t n = train.size();
    if (n < 2) throw Error(ErrorCode::EmptyTraining, fmt::format("gradient boosting needs >= 2 rows (got {})", n));
    if (cfg.loss == Loss::Logistic) {
        bool has0 = false, has1 = false;
        for (double v : train.y) {
            if (v == 0.0) has0 = true;
            else if (v == 1.0) has1 = true;
            else throw Error(ErrorCode::DegenerateLabels, "logistic labels must be 0 or 1");
        }
        if (!has0 || !has1) throw Error(ErrorCode::DegenerateLabels, "logistic loss needs both labels present");
    }

    const double mean_y = std::accumulate(train.y.begin(), train.y.end(), 0.0) / static_cast<double>(n);
    const double base = cfg.loss == Loss::Squared ? mean_y : std::log(mean_y / (1.0 - mean_y));

    const auto cuts = gbt::compute_cuts(train.x, cfg.max_bins);
    const gbt::BinnedMatrix bins(train.x, cuts);
    std::vector<double> margin(n, base), grad(n), hess(n);
    const bool use_val = validation && validation->size() > 0;
    std::vector<double> val_margin(use_val ? validation->size() : 0, base);

    std::vector<gbt::Tree> trees;
    std::vector<double> train_loss, valid_loss;
    int best_iter = -1;
    double best_val = std::numeric_limits<double>::infinity();

    for (int t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (cfg.loss == Loss::Squared) {
                grad[i] = margin[i] - train.y[i];
                hess[i] = 1.0;
            } else {
                const double p = sigmoid(margin[i]);
                grad[i] = p - train.y[i];
                hess[i] = std::max(p * (1.0 - p), 1e-16);
            }
        }
        const auto round = static_cast<std::uint64_t>(t);
        auto rows = sample_indices(n, cfg.subsample_rows, derive_seed(cfg.seed, 1, round));
        auto features = sample_indices(train.x.cols(), cfg.subsample_cols, derive_seed(cfg.seed, 2, round));
        TreeGrower grower(bins, cuts, grad, hess, std::move(features), cfg);
        trees.push_back(grower.grow(rows));

        gbt::accumulate_tree_binned(trees.back(), bins, margin);
        train_loss.push_back(mean_loss(cfg.loss, margin, train.y));
        if (use_val) {
            gbt::accumulate_predictions(std::span(trees).last(1), validation->x, val_margin);
            const double vl = mean_loss(cfg.loss, val_margin, validation->y);
            valid_loss.push_back(vl);
            if (vl < best_val) {
                best_val = vl;
                best_iter = t;
            }
            if (cfg.early_stopping_rounds > 0 && t - best_iter >= cfg.early_stopping_rounds) break;
        }
    }
    if (use_val && best_iter >= 0) {
        trees.resize(static_cast<std::size_t>(best_iter) + 1);
    } else {
        best_iter = static_cast<int>(trees.size()) - 1;
    }
    GbtModel model(cfg.loss, base, train.x.cols(), std::move(trees));
    model.train_loss = std::move(train_loss);
    model.valid_loss = std::move(valid_loss);
    model.best_iteration = best_iter;
    return model;
}

}  // namespace fluxbench
