#pragma once

#include "fluxbench/design.hpp"

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fluxbench {

/// A fitted model over expanded feature rows. Immutable after fitting; safe for concurrent predict.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::string_view kind() const = 0;
    virtual double predict(std::span<const double> expanded) const = 0;
    virtual std::vector<double> predict(const Matrix& x) const;
    double predict(const FeatureVector& f) const;

    virtual nlohmann::json to_json() const = 0;
};

/// Reads any artifact written by Predictor::to_json.
std::unique_ptr<Predictor> predictor_from_json(const nlohmann::json& j);

}  // namespace fluxbench
