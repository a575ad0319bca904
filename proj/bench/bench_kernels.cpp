// Serial reference kernels against their OpenMP counterparts.
#include "fluxbench/aggregate.hpp"
#include "fluxbench/gbt_kernels.hpp"
#include "fluxbench/rng.hpp"

#include <numeric>

#include <benchmark/benchmark.h>
#include <omp.h>

namespace {

using namespace fluxbench;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Matrix x(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) x(r, c) = rng.normal();
    }
    return x;
}

struct HistogramFixture {
    Matrix x = random_matrix(200000, 26, 1);
    gbt::FeatureCuts cuts = gbt::compute_cuts(x, 256);
    gbt::BinnedMatrix bins{x, cuts};
    std::vector<std::uint32_t> rows;
    std::vector<std::uint32_t> features;
    std::vector<double> grad, hess;

    HistogramFixture() {
        rows.resize(x.rows());
        std::iota(rows.begin(), rows.end(), 0u);
        features.resize(x.cols());
        std::iota(features.begin(), features.end(), 0u);
        SplitMix64 rng(2);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            grad.push_back(rng.normal());
            hess.push_back(1.0);
        }
    }
};

const HistogramFixture& histogram_fixture() {
    static const HistogramFixture f;
    return f;
}

template <bool Parallel>
void BM_Histograms(benchmark::State& state) {
    const auto& f = histogram_fixture();
    omp_set_num_threads(static_cast<int>(state.range(0)));
    gbt::HistogramSet out(f.cuts);
    for (auto _ : state) {
        if constexpr (Parallel) {
            gbt::build_histograms(f.bins, f.rows, f.grad, f.hess, f.features, out);
        } else {
            gbt::build_histograms_serial(f.bins, f.rows, f.grad, f.hess, f.features, out);
        }
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows.size()));
}

std::vector<gbt::Tree> random_forest(std::size_t n_trees, int depth, std::size_t n_features, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<gbt::Tree> trees(n_trees);
    for (auto& t : trees) {
        // Complete tree in heap order.
        const std::size_t n = (std::size_t{1} << (depth + 1)) - 1;
        t.nodes.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto& node = t.nodes[i];
            if (2 * i + 2 < n) {
                node.feature = static_cast<std::int32_t>(rng.bounded(n_features));
                node.threshold = rng.normal();
                node.left = static_cast<std::int32_t>(2 * i + 1);
                node.right = static_cast<std::int32_t>(2 * i + 2);
            } else {
                node.value = rng.normal();
            }
        }
    }
    return trees;
}

template <bool Parallel>
void BM_Predict(benchmark::State& state) {
    static const Matrix x = random_matrix(50000, 26, 3);
    static const auto trees = random_forest(200, 6, 26, 4);
    omp_set_num_threads(static_cast<int>(state.range(0)));
    std::vector<double> out(x.rows());
    for (auto _ : state) {
        std::fill(out.begin(), out.end(), 0.0);
        if constexpr (Parallel) {
            gbt::accumulate_predictions(trees, x, out);
        } else {
            gbt::accumulate_predictions_serial(trees, x, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.rows()));
}

std::vector<AlignedSeries> random_series(std::size_t n_sites, int years) {
    SplitMix64 rng(5);
    std::vector<AlignedSeries> out;
    for (std::size_t s = 0; s < n_sites; ++s) {
        AlignedSeries series{DomainKey::of_site(SiteId("B" + std::to_string(s))), {}};
        const auto start = HourTimestamp::from_civil(2015, 1, 1, 0).hours();
        for (std::int64_t h = 0; h < years * 8760; ++h) {
            const double truth = rng.normal();
            series.points.push_back({HourTimestamp(start + h), truth, truth + 0.1 * rng.normal(), rng.uniform() > 0.1});
        }
        out.push_back(std::move(series));
    }
    return out;
}

template <bool Parallel>
void BM_Aggregate(benchmark::State& state) {
    static const auto series = random_series(16, 4);
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto result = Parallel ? aggregate_for_scenario(series, ScenarioKind::Spatial, Scale::Iav)
                               : aggregate_for_scenario_serial(series, ScenarioKind::Spatial, Scale::Iav);
        benchmark::DoNotOptimize(result.data());
    }
}

void thread_args(benchmark::internal::Benchmark* b) {
    const int max_threads = omp_get_num_procs();
    for (int t = 1; t <= max_threads; t *= 2) b->Arg(t);
    if ((max_threads & (max_threads - 1)) != 0) b->Arg(max_threads);
    b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_Histograms<false>)->Apply(thread_args);
BENCHMARK(BM_Histograms<true>)->Apply(thread_args);
BENCHMARK(BM_Predict<false>)->Apply(thread_args);
BENCHMARK(BM_Predict<true>)->Apply(thread_args);
BENCHMARK(BM_Aggregate<false>)->Apply(thread_args);
BENCHMARK(BM_Aggregate<true>)->Apply(thread_args);

BENCHMARK_MAIN();
