#include "fluxbench/gbt_kernels.hpp"

#include "fluxbench/error.hpp"

#include <algorithm>
#include <cmath>

namespace fluxbench::gbt {

namespace {

double midpoint(double a, double b) {
    const double m = a + (b - a) / 2.0;
    return m < b ? m : a;
}

std::vector<double> feature_cuts(std::vector<double> values, std::size_t max_bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> cuts;
    if (values.empty()) return cuts;
    std::vector<double> uniq;
    std::vector<std::size_t> cum;  // cumulative counts up to and including each unique value
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (uniq.empty() || values[i] != uniq.back()) {
            uniq.push_back(values[i]);
            cum.push_back(i + 1);
        } else {
            cum.back() = i + 1;
        }
    }
    const std::size_t limit = max_bins == 0 ? kMaxExactBins : std::min(max_bins, kMaxExactBins);
    if (uniq.size() <= limit) {
        for (std::size_t i = 0; i + 1 < uniq.size(); ++i) cuts.push_back(midpoint(uniq[i], uniq[i + 1]));
        return cuts;
    }
    // Quantile cuts: place a cut after the unique value where the cumulative count first
    // reaches k * n / limit.
    const double n = static_cast<double>(values.size());
    std::size_t k = 1;
    for (std::size_t i = 0; i + 1 < uniq.size() && k < limit; ++i) {
        const double target = n * static_cast<double>(k) / static_cast<double>(limit);
        if (static_cast<double>(cum[i]) >= target) {
            cuts.push_back(midpoint(uniq[i], uniq[i + 1]));
            while (k < limit && static_cast<double>(cum[i]) >= n * static_cast<double>(k) / static_cast<double>(limit)) {
                ++k;
            }
        }
    }
    return cuts;
}

}  // namespace

BinCode FeatureCuts::code(std::size_t f, double x) const {
    const auto& c = cuts[f];
    return static_cast<BinCode>(std::lower_bound(c.begin(), c.end(), x) - c.begin());
}

FeatureCuts compute_cuts(const Matrix& x, std::size_t max_bins) {
    FeatureCuts out;
    out.cuts.resize(x.cols());
    const auto cols = static_cast<std::ptrdiff_t>(x.cols());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t f = 0; f < cols; ++f) {
        std::vector<double> values(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) values[r] = x(r, static_cast<std::size_t>(f));
        out.cuts[static_cast<std::size_t>(f)] = feature_cuts(std::move(values), max_bins);
    }
    return out;
}

BinnedMatrix::BinnedMatrix(const Matrix& x, const FeatureCuts& cuts)
    : rows_(x.rows()), cols_(x.cols()), codes_(x.rows() * x.cols()) {
    const auto cols = static_cast<std::ptrdiff_t>(cols_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < cols; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        for (std::size_t r = 0; r < rows_; ++r) codes_[fi * rows_ + r] = cuts.code(fi, x(r, fi));
    }
}

HistogramSet::HistogramSet(const FeatureCuts& cuts) {
    offsets_.push_back(0);
    for (std::size_t f = 0; f < cuts.n_features(); ++f) offsets_.push_back(offsets_.back() + cuts.n_bins(f));
    bins_.resize(offsets_.back());
}

void HistogramSet::clear() { std::fill(bins_.begin(), bins_.end(), BinStats{}); }

void HistogramSet::subtract(const HistogramSet& parent, const HistogramSet& sibling,
                            std::span<const std::uint32_t> features) {
    for (auto f : features) {
        auto out = feature(f);
        const auto p = parent.feature(f);
        const auto s = sibling.feature(f);
        for (std::size_t b = 0; b < out.size(); ++b) {
            out[b].grad = p[b].grad - s[b].grad;
            out[b].hess = p[b].hess - s[b].hess;
            out[b].count = p[b].count - s[b].count;
        }
    }
}

bool HistogramSet::operator==(const HistogramSet& other) const {
    if (offsets_ != other.offsets_) return false;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        if (bins_[i].grad != other.bins_[i].grad || bins_[i].hess != other.bins_[i].hess ||
            bins_[i].count != other.bins_[i].count) {
            return false;
        }
    }
    return true;
}

namespace {

void fill_feature(const BinnedMatrix& bins, std::span<const std::uint32_t> rows, std::span<const double> grad,
                  std::span<const double> hess, std::uint32_t f, std::span<BinStats> hist) {
    std::fill(hist.begin(), hist.end(), BinStats{});
    const auto col = bins.column(f);
    for (auto r : rows) {
        auto& b = hist[col[r]];
        b.grad += grad[r];
        b.hess += hess[r];
        ++b.count;
    }
}

}  // namespace

void build_histograms_serial(const BinnedMatrix& bins, std::span<const std::uint32_t> rows,
                             std::span<const double> grad, std::span<const double> hess,
                             std::span<const std::uint32_t> features, HistogramSet& out) {
    for (auto f : features) fill_feature(bins, rows, grad, hess, f, out.feature(f));
}

void build_histograms(const BinnedMatrix& bins, std::span<const std::uint32_t> rows, std::span<const double> grad,
                      std::span<const double> hess, std::span<const std::uint32_t> features, HistogramSet& out) {
    const auto n = static_cast<std::ptrdiff_t>(features.size());
    // Small nodes are not worth a fork.
    if (rows.size() * features.size() < 16384) {
        build_histograms_serial(bins, rows, grad, hess, features, out);
        return;
    }
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto f = features[static_cast<std::size_t>(i)];
        fill_feature(bins, rows, grad, hess, f, out.feature(f));
    }
}

double Tree::predict(std::span<const double> x) const {
    std::int32_t i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double Tree::predict_binned(const BinnedMatrix& bins, std::size_t row) const {
    std::int32_t i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = bins(row, static_cast<std::size_t>(n.feature)) <= n.split_bin ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

void accumulate_predictions_serial(std::span<const Tree> trees, const Matrix& x, std::span<double> out) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        double acc = out[r];
        for (const auto& t : trees) acc += t.predict(row);
        out[r] = acc;
    }
}

void accumulate_predictions(std::span<const Tree> trees, const Matrix& x, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        const auto row = x.row(static_cast<std::size_t>(r));
        double acc = out[static_cast<std::size_t>(r)];
        for (const auto& t : trees) acc += t.predict(row);
        out[static_cast<std::size_t>(r)] = acc;
    }
}

void accumulate_tree_binned(const Tree& tree, const BinnedMatrix& bins, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(bins.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        out[static_cast<std::size_t>(r)] += tree.predict_binned(bins, static_cast<std::size_t>(r));
    }
}

}  // namespace fluxbench::gbt
