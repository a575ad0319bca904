#include "fluxbench/models.hpp"

#include "fluxbench/error.hpp"
#include "fluxbench/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

namespace fluxbench {

std::vector<double> Predictor::predict(const Matrix& x) const {
    std::vector<double> out(x.rows());
    const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        out[static_cast<std::size_t>(r)] = predict(x.row(static_cast<std::size_t>(r)));
    }
    return out;
}

double Predictor::predict(const FeatureVector& f) const {
    std::array<double, kNumExpanded> buf{};
    expand(f, buf);
    return predict(std::span<const double>(buf));
}

std::unique_ptr<Predictor> predictor_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", "") != "fluxbench-model") {
            throw Error(ErrorCode::ParseError, "not a fluxbench model artifact");
        }
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "constant") return std::make_unique<ConstantPredictor>(j.at("value").get<double>());
        if (kind == "ols") {
            return std::make_unique<LinearPredictor>(j.at("intercept").get<double>(),
                                                     j.at("coefficients").get<std::vector<double>>());
        }
        if (kind == "gbt") return std::make_unique<GbtModel>(GbtModel::from_json(j));
        throw Error(ErrorCode::ParseError, fmt::format("unknown model kind '{}'", kind));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, fmt::format("model artifact: {}", e.what()));
    }
}

nlohmann::json ConstantPredictor::to_json() const {
    return {{"format", "fluxbench-model"}, {"version", 1}, {"kind", "constant"}, {"value", value_}};
}

double LinearPredictor::predict(std::span<const double> x) const {
    double acc = intercept_;
    for (std::size_t i = 0; i < coefficients_.size(); ++i) acc += coefficients_[i] * x[i];
    return acc;
}

nlohmann::json LinearPredictor::to_json() const {
    return {{"format", "fluxbench-model"},
            {"version", 1},
            {"kind", "ols"},
            {"intercept", intercept_},
            {"coefficients", coefficients_}};
}

ConstantPredictor fit_constant(const Rows& rows) {
    if (rows.size() == 0) throw Error(ErrorCode::EmptyTraining, "constant baseline needs >= 1 row");
    return ConstantPredictor(std::accumulate(rows.y.begin(), rows.y.end(), 0.0) / static_cast<double>(rows.size()));
}

LinearPredictor fit_ols(const Rows& rows) {
    const std::size_t n = rows.size();
    if (n == 0) throw Error(ErrorCode::EmptyTraining, "least squares needs >= 1 row");
    const std::size_t p = rows.x.cols();
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;

    Vec mean_x = Vec::Zero(static_cast<Eigen::Index>(p));
    double mean_y = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) mean_x[static_cast<Eigen::Index>(c)] += rows.x(r, c);
        mean_y += rows.y[r];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    Mat gram = Mat::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Vec rhs = Vec::Zero(static_cast<Eigen::Index>(p));
    Vec xc(static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            xc[static_cast<Eigen::Index>(c)] = rows.x(r, c) - mean_x[static_cast<Eigen::Index>(c)];
        }
        gram.selfadjointView<Eigen::Lower>().rankUpdate(xc);
        rhs += xc * (rows.y[r] - mean_y);
    }
    gram = gram.selfadjointView<Eigen::Lower>();

    Vec beta = Vec::Zero(static_cast<Eigen::Index>(p));
    const double trace = gram.trace();
    if (p > 0 && trace > 0.0) {
        Eigen::LDLT<Mat> exact(gram);
        const auto& d = exact.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        const bool well_posed = exact.info() == Eigen::Success && d.minCoeff() > 1e-12 * dmax;
        if (well_posed) {
            beta = exact.solve(rhs);
        } else {
            const double jitter = 1e-8 * trace / static_cast<double>(p);
            Mat reg = gram;
            reg.diagonal().array() += jitter;
            Eigen::LLT<Mat> llt(reg);
            // Iterated Tikhonov from zero stays in the row space of the gram matrix and
            // converges to the pseudo-inverse solution.
            for (int it = 0; it < 200; ++it) {
                const Vec step = llt.solve(rhs - gram * beta);
                beta += step;
                if (step.norm() <= 1e-15 * std::max(1.0, beta.norm())) break;
            }
        }
    }
    const double intercept = mean_y - mean_x.dot(beta);
    return LinearPredictor(intercept, std::vector<double>(beta.data(), beta.data() + beta.size()));
}

std::vector<GbtConfig> draw_configs(const TunerSpec& spec) {
    if (spec.n_configs < 1) throw Error(ErrorCode::InvalidConfig, "n_configs must be >= 1");
    const auto& r = spec.ranges;
    SplitMix64 rng(spec.seed);
    std::vector<GbtConfig> out;
    for (int i = 0; i < spec.n_configs; ++i) {
        GbtConfig cfg;
        cfg.n_trees = r.n_trees_min + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(r.n_trees_max - r.n_trees_min + 1)));
        cfg.max_depth = r.depth_min + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(r.depth_max - r.depth_min + 1)));
        cfg.learning_rate = std::exp(rng.uniform(std::log(r.lr_min), std::log(r.lr_max)));
        cfg.subsample_rows = rng.uniform(r.subsample_min, r.subsample_max);
        cfg.subsample_cols = rng.uniform(r.subsample_min, r.subsample_max);
        cfg.early_stopping_rounds = r.early_stopping_rounds;
        cfg.seed = derive_seed(spec.seed, 3, static_cast<std::uint64_t>(i));
        out.push_back(cfg);
    }
    return out;
}

double rmse(std::span<const double> prediction, std::span<const double> truth) {
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = prediction[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(truth.size()));
}

TunedGbt select_gbt(const Rows& train, const Rows& validation, std::span<const GbtConfig> candidates) {
    if (validation.size() == 0) throw Error(ErrorCode::EmptyValidation, "model selection needs validation rows");
    if (candidates.empty()) throw Error(ErrorCode::InvalidConfig, "no candidate configurations");
    std::optional<TunedGbt> best;
    std::vector<double> scores;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto model = fit_gbt(train, candidates[i], &validation);
        const double score = rmse(model.predict(validation.x), validation.y);
        scores.push_back(score);
        if (!best || score < scores[best->selected]) best = TunedGbt{std::move(model), candidates[i], i, {}};
    }
    best->validation_rmse = std::move(scores);
    return std::move(*best);
}

TunedGbt random_search(const Rows& train, const Rows& validation, const TunerSpec& spec) {
    if (validation.size() == 0) throw Error(ErrorCode::EmptyValidation, "model selection needs validation rows");
    const auto candidates = draw_configs(spec);
    return select_gbt(train, validation, candidates);
}

const double* PredictionSet::find(const SiteId& site, HourTimestamp t) const {
    auto it = entries.find({site, t});
    return it == entries.end() ? nullptr : &it->second;
}

PredictionSet import_predictions(std::istream& in, std::string model_name) {
    PredictionSet set{std::move(model_name), {}};
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty prediction file");
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    };
    std::vector<std::string> header;
    {
        std::string_view h(line);
        std::size_t start = 0;
        while (true) {
            auto pos = h.find(',', start);
            header.emplace_back(trim(h.substr(start, pos == std::string_view::npos ? pos : pos - start)));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    }
    auto col = [&](std::string_view name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw Error(ErrorCode::MissingColumn, std::string(name));
    };
    const auto c_site = col("site"), c_time = col("time"), c_value = col("value");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        std::vector<std::string_view> f;
        std::string_view l(line);
        std::size_t start = 0;
        while (true) {
            auto pos = l.find(',', start);
            f.push_back(trim(l.substr(start, pos == std::string_view::npos ? pos : pos - start)));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        auto at = [&](std::size_t i) { return i < f.size() ? f[i] : std::string_view{}; };
        if (at(c_site).empty()) throw Error(ErrorCode::ParseError, fmt::format("row {}, column site: empty", row));
        HourTimestamp t;
        try {
            t = HourTimestamp::parse(at(c_time));
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, fmt::format("row {}, column time: {}", row, e.what()));
        }
        double v = 0.0;
        auto text = at(c_value);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
            throw Error(ErrorCode::ParseError, fmt::format("row {}, column value: '{}' is not a finite number", row, text));
        }
        SiteId site{std::string(at(c_site))};
        if (!set.entries.emplace(std::pair{site, t}, v).second) {
            throw Error(ErrorCode::DuplicateKey, fmt::format("({}, {})", site.str(), t.to_string()));
        }
    }
    return set;
}

PredictionSet import_predictions(const std::filesystem::path& path, std::string model_name) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
    if (model_name.empty()) model_name = path.stem().string();
    return import_predictions(in, std::move(model_name));
}

void write_predictions(const PredictionSet& set, std::ostream& out) {
    out << "site,time,value\n";
    for (const auto& [key, v] : set.entries) {
        out << key.first.str() << ',' << key.second.to_string() << ',' << fmt::format("{}", v) << '\n';
    }
}

}  // namespace fluxbench
