#include "visrisk/ewm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "visrisk/error.hpp"

namespace visrisk::ewm {

std::vector<std::string> EwmModel::indicators() const {
    std::vector<std::string> out;
    for (const auto& g : groups) out.insert(out.end(), g.indicators.begin(), g.indicators.end());
    return out;
}

void EwmModel::validate() const {
    std::set<std::string> seen;
    for (const auto& g : groups)
        for (const auto& k : g.indicators)
            if (!seen.insert(k).second) throw DataError("indicator '" + k + "' is in more than one group");
    for (const auto& [k, w] : weights) {
        if (!seen.contains(k)) throw DataError("weighted indicator '" + k + "' is not in any group");
        if (!std::isfinite(w)) throw DataError("weight of '" + k + "' is not finite");
    }
    if (!std::isfinite(bias)) throw DataError("bias is not finite");
}

// Clamped so extreme scores still give a probability strictly inside (0, 1).
double logistic(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    return std::clamp(p, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

RiskSeries score(const EwmModel& model, const DataCube& cube) {
    model.validate();
    RiskSeries out;
    out.bias = model.bias;
    std::vector<std::vector<std::pair<std::size_t, double>>> groups;  // (cube index, weight)
    for (const auto& g : model.groups) {
        out.groups.push_back(g.name);
        auto& terms = groups.emplace_back();
        for (const auto& k : g.indicators) {
            auto idx = cube.indicator_index(k);
            if (!idx) throw NotFoundError("model indicator '" + k + "' is absent from the cube");
            auto w = model.weights.find(k);
            terms.emplace_back(*idx, w == model.weights.end() ? 0.0 : w->second);
        }
    }

    for (std::size_t e = 0; e < cube.entity_count(); ++e) {
        for (std::size_t t = 0; t < cube.time_count(); ++t) {
            RiskRow row{cube.entities()[e], cube.times()[t].label, true, {}, 0.0, 0.0, {}};
            for (std::size_t g = 0; g < groups.size(); ++g)
                for (const auto& [k, _] : groups[g])
                    if (!cube.observed(e, t, k)) row.missing.push_back(cube.indicators()[k]);
            if (!row.missing.empty()) {
                row.scored = false;
                out.rows.push_back(std::move(row));
                continue;
            }
            double total = model.bias;
            for (const auto& terms : groups) {
                double c = 0.0;
                for (const auto& [k, w] : terms) c += w * cube.value(e, t, k) / 100.0;
                row.contributions.push_back(c);
                total += c;
            }
            row.score = total;
            row.probability = logistic(total);
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

Design build_design(const DataCube& cube, const std::vector<LabelRecord>& labels,
                    const std::vector<std::string>& indicators) {
    Design d;
    d.indicators = indicators;
    std::vector<std::size_t> cols;
    for (const auto& k : indicators) {
        auto idx = cube.indicator_index(k);
        if (!idx) throw NotFoundError("model indicator '" + k + "' is absent from the cube");
        cols.push_back(*idx);
    }
    std::vector<double> flat;
    for (const auto& l : labels) {
        double y;
        if (l.label == "0")
            y = 0.0;
        else if (l.label == "1")
            y = 1.0;
        else
            throw DataError("label for (" + l.entity + "," + l.time.label + ") must be 0 or 1");
        auto e = cube.entity_index(l.entity);
        auto t = cube.time_index(l.time.label);
        if (!e || !t) continue;
        bool complete = true;
        for (auto k : cols) complete = complete && cube.observed(*e, *t, k);
        if (!complete) continue;
        for (auto k : cols) flat.push_back(cube.value(*e, *t, k) / 100.0);
        d.labels.push_back(y);
    }
    d.features = Matrix(d.labels.size(), cols.size());
    std::copy(flat.begin(), flat.end(), d.features.data().begin());
    return d;
}

namespace {

double linear(const Design& d, std::span<const double> params, std::size_t r) {
    const std::size_t p = d.features.cols();
    double z = params[p];
    auto x = d.features.row(r);
    for (std::size_t k = 0; k < p; ++k) z += params[k] * x[k];
    return z;
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check(const Design& d, std::span<const double> params) {
    if (params.size() != d.features.cols() + 1) throw std::invalid_argument("parameter vector size mismatch");
}

}  // namespace

double objective(const Design& d, std::span<const double> params, double l2) {
    check(d, params);
    const std::size_t n = d.labels.size(), p = d.features.cols();
    double ll = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double z = linear(d, params, r);
        ll += d.labels[r] * z - softplus(z);
    }
    double penalty = 0.0;
    for (std::size_t k = 0; k < p; ++k) penalty += params[k] * params[k];
    return (n == 0 ? 0.0 : ll / static_cast<double>(n)) - 0.5 * l2 * penalty;
}

std::vector<double> gradient(const Design& d, std::span<const double> params, double l2) {
    check(d, params);
    const std::size_t n = d.labels.size(), p = d.features.cols();
    std::vector<double> g(p + 1, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double resid = d.labels[r] - logistic(linear(d, params, r));
        auto x = d.features.row(r);
        for (std::size_t k = 0; k < p; ++k) g[k] += resid * x[k];
        g[p] += resid;
    }
    const double inv = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k <= p; ++k) g[k] *= inv;
    for (std::size_t k = 0; k < p; ++k) g[k] -= l2 * params[k];
    return g;
}

FitResult fit(const Design& d, const std::vector<IndicatorGroup>& groups, const FitConfig& config) {
    if (!(config.learning_rate > 0.0) || config.iterations == 0 || config.l2 < 0.0)
        throw std::invalid_argument("invalid fit configuration");
    const auto pos = std::count(d.labels.begin(), d.labels.end(), 1.0);
    const auto neg = static_cast<std::ptrdiff_t>(d.labels.size()) - pos;
    if (pos == 0 || neg == 0) throw DataError("fit needs at least one positive and one negative labelled row");

    const std::size_t p = d.features.cols();
    std::vector<double> params(p + 1, 0.0), trial(p + 1);
    double obj = objective(d, params, config.l2);
    double step = config.learning_rate;
    FitResult result;
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };

    auto g = gradient(d, params, config.l2);
    std::size_t it = 0;
    for (; it < config.iterations; ++it) {
        if (norm(g) <= config.tolerance) {
            result.converged = true;
            break;
        }
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t k = 0; k <= p; ++k) trial[k] = params[k] + step * g[k];
            const double t_obj = objective(d, trial, config.l2);
            if (t_obj >= obj) {
                params.swap(trial);
                obj = t_obj;
                accepted = true;
                step = std::min(step * 1.25, config.learning_rate * 64.0);
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no ascent direction left at machine precision
        for (double v : params)
            if (!std::isfinite(v)) throw NumericError("early-warning fit diverged");
        g = gradient(d, params, config.l2);
    }
    result.iterations = it;
    result.gradient_norm = norm(g);
    if (!result.converged && result.gradient_norm <= config.tolerance) result.converged = true;
    if (!result.converged)
        result.warning = "iteration cap reached without convergence (gradient norm " +
                         std::to_string(result.gradient_norm) + "); data may be separable, consider l2 > 0";

    result.model.groups = groups;
    for (std::size_t k = 0; k < p; ++k) result.model.weights[d.indicators[k]] = params[k];
    result.model.bias = params[p];
    result.model.validate();
    return result;
}

}  // namespace visrisk::ewm
