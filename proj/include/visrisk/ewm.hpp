#pragma once

// Early-warning model: a pooled logistic score over percentile-scaled
// indicators, decomposed additively into indicator-group contributions.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "visrisk/datacube.hpp"
#include "visrisk/matrix.hpp"

namespace visrisk::ewm {

struct IndicatorGroup {
    std::string name;
    std::vector<std::string> indicators;

    friend bool operator==(const IndicatorGroup&, const IndicatorGroup&) = default;
};

struct EwmModel {
    std::vector<IndicatorGroup> groups;
    std::map<std::string, double> weights;  // indicator -> weight
    double bias = 0.0;

    /// Indicators in group order.
    std::vector<std::string> indicators() const;
    /// Throws DataError unless each indicator sits in exactly one group, every
    /// weighted indicator is grouped, and all weights are finite.
    void validate() const;

    friend bool operator==(const EwmModel&, const EwmModel&) = default;
};

struct RiskRow {
    std::string entity;
    std::string time;
    bool scored = false;               // false when a model indicator is missing
    std::vector<std::string> missing;  // the missing indicators
    double score = 0.0;
    double probability = 0.0;
    std::vector<double> contributions;  // one per group; bias + sum == score
};

struct RiskSeries {
    std::vector<std::string> groups;
    double bias = 0.0;
    std::vector<RiskRow> rows;  // entity-major, time order
};

double logistic(double z);

/// Scores every (entity, time) of a percentile-transformed cube. Throws
/// NotFoundError naming a model indicator that the cube lacks.
RiskSeries score(const EwmModel& model, const DataCube& percentiles);

/// Pooled design: features are percentiles / 100, one row per labelled
/// (entity, time) with all indicators observed.
struct Design {
    std::vector<std::string> indicators;
    Matrix features;
    std::vector<double> labels;  // 0 or 1
};

Design build_design(const DataCube& percentiles, const std::vector<LabelRecord>& labels,
                    const std::vector<std::string>& indicators);

/// Mean log-likelihood minus (l2 / 2) |w|^2. `params` = weights then bias.
double objective(const Design& design, std::span<const double> params, double l2);
std::vector<double> gradient(const Design& design, std::span<const double> params, double l2);

struct FitConfig {
    double learning_rate = 1.0;
    std::size_t iterations = 20000;
    double l2 = 0.0;
    double tolerance = 1e-8;  // stop when the gradient norm falls below this
};

struct FitResult {
    EwmModel model;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    std::optional<std::string> warning;
};

/// Full-batch gradient ascent from zero with step halving on a failed ascent.
/// Needs at least one positive and one negative row (DataError otherwise).
FitResult fit(const Design& design, const std::vector<IndicatorGroup>& groups, const FitConfig& config);

}  // namespace visrisk::ewm
