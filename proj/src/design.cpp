#include "fluxbench/design.hpp"

#include <algorithm>

namespace fluxbench {

void expand(const FeatureVector& f, std::span<double> out) {
    std::copy(f.continuous.begin(), f.continuous.end(), out.begin());
    std::fill(out.begin() + kNumContinuous, out.begin() + kNumExpanded, 0.0);
    out[kNumContinuous + static_cast<std::size_t>(f.pft)] = 1.0;
}

std::vector<std::string> expanded_names() {
    std::vector<std::string> names(kContinuousNames.begin(), kContinuousNames.end());
    for (auto p : kPftNames) names.push_back("PFT_" + std::string(p));
    return names;
}

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(idx[i] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

Matrix Matrix::drop_column(std::size_t col) const {
    Matrix out(rows_, cols_ - 1);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::size_t k = 0;
        for (std::size_t c = 0; c < cols_; ++c) {
            if (c != col) out(r, k++) = (*this)(r, c);
        }
    }
    return out;
}

Rows Rows::select(std::span<const std::size_t> idx) const {
    Rows out{x.select_rows(idx), {}};
    out.y.reserve(idx.size());
    for (auto i : idx) out.y.push_back(y[i]);
    return out;
}

namespace {

template <typename Fn>
void for_each_domain_record(const Dataset& ds, std::span<const DomainKey> domains, Fn&& fn) {
    for (const auto& d : domains) {
        const auto* site = ds.find(d.site);
        if (!site) continue;
        for (const auto& r : site->records) {
            if (d.year && r.time.year() != *d.year) continue;
            fn(*site, r);
        }
    }
}

}  // namespace

Rows make_rows(const Dataset& ds, std::span<const DomainKey> domains, Target target, std::vector<RowKey>* keys) {
    Rows rows{Matrix(0, kNumExpanded), {}};
    std::array<double, kNumExpanded> buf{};
    for_each_domain_record(ds, domains, [&](const SiteData& s, const HourlyRecord& r) {
        if (!r.valid()) return;
        expand(r.features, buf);
        rows.x.append_row(buf);
        rows.y.push_back(r.targets.get(target));
        if (keys) keys->push_back({s.meta.site, r.time});
    });
    return rows;
}

Matrix make_prediction_inputs(const Dataset& ds, std::span<const DomainKey> domains, std::vector<RowKey>& keys) {
    Matrix x(0, kNumExpanded);
    std::array<double, kNumExpanded> buf{};
    for_each_domain_record(ds, domains, [&](const SiteData& s, const HourlyRecord& r) {
        if (!r.features.finite()) return;
        expand(r.features, buf);
        x.append_row(buf);
        keys.push_back({s.meta.site, r.time});
    });
    return x;
}

}  // namespace fluxbench
