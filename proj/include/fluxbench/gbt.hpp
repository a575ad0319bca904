#pragma once

#include "fluxbench/gbt_kernels.hpp"
#include "fluxbench/predictor.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace fluxbench {

enum class Loss { Squared, Logistic };
std::string_view to_string(Loss loss);

struct GbtConfig {
    int n_trees = 100;
    int max_depth = 6;
    double learning_rate = 0.1;
    double subsample_rows = 1.0;
    double subsample_cols = 1.0;
    Loss loss = Loss::Squared;
    int early_stopping_rounds = 50;  // 0 disables early stopping
    std::uint64_t seed = 0;
    std::size_t max_bins = 256;      // 0 = exact splits
    double min_child_weight = 1.0;   // minimum hessian sum per child

    /// Throws InvalidConfig when a field is out of range.
    void validate() const;
};

nlohmann::json to_json(const GbtConfig& cfg);

class GbtModel final : public Predictor {
public:
    GbtModel() = default;
    GbtModel(Loss loss, double base_score, std::size_t n_features, std::vector<gbt::Tree> trees);

    std::string_view kind() const override { return "gbt"; }
    /// Squared loss: the regression value. Logistic loss: P(label = 1).
    double predict(std::span<const double> x) const override;
    std::vector<double> predict(const Matrix& x) const override;
    std::vector<double> predict_margin(const Matrix& x) const;
    nlohmann::json to_json() const override;
    static GbtModel from_json(const nlohmann::json& j);

    Loss loss() const { return loss_; }
    double base_score() const { return base_score_; }
    std::span<const gbt::Tree> trees() const { return trees_; }

    /// Per-round training loss (on all training rows) and validation loss, when recorded.
    std::vector<double> train_loss;
    std::vector<double> valid_loss;
    int best_iteration = -1;

private:
    Loss loss_ = Loss::Squared;
    double base_score_ = 0.0;
    std::size_t n_features_ = 0;
    std::vector<gbt::Tree> trees_;
};

/// Gradient boosting with depth-wise regression trees. Validation rows, when given, drive
/// early stopping and the model is truncated to the best round.
GbtModel fit_gbt(const Rows& train, const GbtConfig& cfg, const Rows* validation = nullptr);

double sigmoid(double margin);

}  // namespace fluxbench
