#pragma once

#include "fluxbench/dataset.hpp"
#include "fluxbench/scenarios.hpp"

#include <span>
#include <string>
#include <vector>

namespace fluxbench {

/// Expanded model input: 12 continuous covariates followed by the 14-way PFT one-hot block.
inline constexpr std::size_t kNumExpanded = kNumContinuous + kNumPft;

void expand(const FeatureVector& f, std::span<double> out);
std::vector<std::string> expanded_names();

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> data() const { return data_; }

    void append_row(std::span<const double> values);
    Matrix select_rows(std::span<const std::size_t> idx) const;
    Matrix drop_column(std::size_t col) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Supervised rows: expanded features with one target column.
struct Rows {
    Matrix x;
    std::vector<double> y;

    std::size_t size() const { return y.size(); }
    Rows select(std::span<const std::size_t> idx) const;
};

/// Where a row came from, so predictions can be keyed back to (site, time).
struct RowKey {
    SiteId site;
    HourTimestamp time;
};

/// Valid records of the listed domains, in domain order then time order.
Rows make_rows(const Dataset& ds, std::span<const DomainKey> domains, Target target,
               std::vector<RowKey>* keys = nullptr);

/// All records of the listed domains whose features are finite (targets may be missing),
/// used when predicting every test-domain hour.
Matrix make_prediction_inputs(const Dataset& ds, std::span<const DomainKey> domains, std::vector<RowKey>& keys);

}  // namespace fluxbench
