#pragma once

// Data-parallel inner loops of tree boosting. Every kernel has a serial reference
// (suffix _serial) kept for tests and benchmarks; the OpenMP versions partition work so
// that each output element is accumulated by a single thread in the serial order, which
// makes both variants bit-identical for any thread count.

#include "fluxbench/design.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fluxbench::gbt {

using BinCode = std::uint16_t;
inline constexpr std::size_t kMaxExactBins = 65535;

/// Split candidates per feature: bin(x) = number of cuts strictly below x, so
/// bin(x) <= b  <=>  x <= cuts[b].
struct FeatureCuts {
    std::vector<std::vector<double>> cuts;

    std::size_t n_features() const { return cuts.size(); }
    std::size_t n_bins(std::size_t f) const { return cuts[f].size() + 1; }
    BinCode code(std::size_t f, double x) const;
};

/// max_bins == 0 selects exact mode: one cut between every pair of adjacent distinct values.
FeatureCuts compute_cuts(const Matrix& x, std::size_t max_bins);

/// Column-major bin codes.
class BinnedMatrix {
public:
    BinnedMatrix() = default;
    BinnedMatrix(const Matrix& x, const FeatureCuts& cuts);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const BinCode> column(std::size_t f) const { return {codes_.data() + f * rows_, rows_}; }
    BinCode operator()(std::size_t r, std::size_t f) const { return codes_[f * rows_ + r]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<BinCode> codes_;
};

struct BinStats {
    double grad = 0.0;
    double hess = 0.0;
    std::uint32_t count = 0;
};

/// Per-feature gradient histograms laid out contiguously; offset(f) indexes feature f.
class HistogramSet {
public:
    HistogramSet() = default;
    explicit HistogramSet(const FeatureCuts& cuts);

    std::span<BinStats> feature(std::size_t f) { return {bins_.data() + offsets_[f], offsets_[f + 1] - offsets_[f]}; }
    std::span<const BinStats> feature(std::size_t f) const {
        return {bins_.data() + offsets_[f], offsets_[f + 1] - offsets_[f]};
    }
    void clear();
    /// this = parent - sibling, on the listed features.
    void subtract(const HistogramSet& parent, const HistogramSet& sibling, std::span<const std::uint32_t> features);

    bool operator==(const HistogramSet& other) const;

private:
    std::vector<std::size_t> offsets_;
    std::vector<BinStats> bins_;
};

void build_histograms_serial(const BinnedMatrix& bins, std::span<const std::uint32_t> rows,
                             std::span<const double> grad, std::span<const double> hess,
                             std::span<const std::uint32_t> features, HistogramSet& out);
void build_histograms(const BinnedMatrix& bins, std::span<const std::uint32_t> rows, std::span<const double> grad,
                      std::span<const double> hess, std::span<const std::uint32_t> features, HistogramSet& out);

/// Flat binary tree. Leaves have feature == -1.
struct Tree {
    struct Node {
        std::int32_t feature = -1;
        double threshold = 0.0;
        std::uint16_t split_bin = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const;
    double predict_binned(const BinnedMatrix& bins, std::size_t row) const;
};

/// out[i] += sum over trees of tree.predict(row i).
void accumulate_predictions_serial(std::span<const Tree> trees, const Matrix& x, std::span<double> out);
void accumulate_predictions(std::span<const Tree> trees, const Matrix& x, std::span<double> out);
void accumulate_tree_binned(const Tree& tree, const BinnedMatrix& bins, std::span<double> out);

}  // namespace fluxbench::gbt
